"""
Configuration and Constants for ptyx
"""

import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


# Search budgets
DEFAULT_BUDGET_NODES = _int_env("PTYX_BUDGET_NODES", 20000)
DEFAULT_BUDGET_DEPTH = _int_env("PTYX_BUDGET_DEPTH", 12)
DEFAULT_BUDGET_SECONDS = _float_env("PTYX_BUDGET_SECONDS", 30.0)

# Depth bound for proof trees behind proof(...) dilators
DEFAULT_PROOF_DEPTH = _int_env("PTYX_PROOF_DEPTH", 64)

# Law checking
DEFAULT_SEED = _int_env("PTYX_SEED", 20231)
DEFAULT_SAMPLE = _int_env("PTYX_SAMPLE", 40)

# Probes run one search per (alpha, entry) on a thread pool of this size
PROBE_WORKERS = _int_env("PTYX_WORKERS", 4)

# Logging Configuration
LOG_LEVEL = os.getenv("PTYX_LOG_LEVEL", "WARNING")
LOG_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s"
)
LOG_JSON = os.getenv("PTYX_LOG_JSON", "false").lower() == "true"


# Validation
def validate_config():
    """Validate numeric configuration"""
    for name, value in (
        ("PTYX_BUDGET_NODES", DEFAULT_BUDGET_NODES),
        ("PTYX_BUDGET_DEPTH", DEFAULT_BUDGET_DEPTH),
        ("PTYX_PROOF_DEPTH", DEFAULT_PROOF_DEPTH),
        ("PTYX_SAMPLE", DEFAULT_SAMPLE),
        ("PTYX_WORKERS", PROBE_WORKERS),
    ):
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")

    if DEFAULT_BUDGET_SECONDS <= 0:
        raise ValueError(
            f"PTYX_BUDGET_SECONDS must be positive, got {DEFAULT_BUDGET_SECONDS}"
        )

    if DEFAULT_SEED < 0:
        raise ValueError(f"PTYX_SEED must be non-negative, got {DEFAULT_SEED}")

    if LOG_LEVEL.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
        raise ValueError(f"PTYX_LOG_LEVEL is not a logging level: {LOG_LEVEL!r}")


def get_env_example():
    """Get example environment variables for .env file"""
    return """# Search budgets
PTYX_BUDGET_NODES=20000
PTYX_BUDGET_DEPTH=12
PTYX_BUDGET_SECONDS=30
PTYX_PROOF_DEPTH=64

# Law checking and property sampling
PTYX_SEED=20231
PTYX_SAMPLE=40
PTYX_WORKERS=4

# Logging (reports go to stdout, logs to stderr)
PTYX_LOG_LEVEL=WARNING
PTYX_LOG_JSON=false
"""


if __name__ == "__main__":
    # Test configuration when run directly
    try:
        validate_config()
        print("Configuration validated successfully")
    except ValueError as e:
        print(f"Configuration error: {e}")
        print("\nCreate a .env file with these variables:")
        print(get_env_example())
