"""
SOC-ACOPF tightness toolkit: SOC relaxation of AC optimal power flow, relaxation-gap
evaluation and the loss-penalty tightness reinforcement loop.
"""

__version__ = "0.1.0"

from src.config import Config

# Initialize configurations
Config.validate()
