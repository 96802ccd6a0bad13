import os

from app.models import ProblemParams


class Config:
    DEFAULT_PARAMS = ProblemParams()
    DEFAULT_N_LIST = (4, 8, 16, 32, 64)
    DEFAULT_ALPHA_LIST = (50.0, 100.0, 200.0)
    CSV_SIGNIFICANT_DIGITS = int(os.environ.get("HEATFD_CSV_DIGITS", "9"))
    SWEEP_WORKERS = int(os.environ.get("HEATFD_SWEEP_WORKERS", "4"))
    TABLE1_RTOL = float(os.environ.get("HEATFD_TABLE1_RTOL", "1e-5"))
    RATIO_BAND = 0.25
    LOG_LEVEL = os.environ.get("HEATFD_LOG_LEVEL", "WARNING")


class TestingConfig(Config):
    TESTING = True
    SWEEP_WORKERS = 1
    LOG_LEVEL = "DEBUG"
