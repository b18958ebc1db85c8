# thrifty/config.py
import logging
import os

from dotenv import load_dotenv

# Load environment variables from .env file (repo root)
load_dotenv()

OUTPUT_DIR = os.getenv("THRIFTY_OUTPUT_DIR", "results")
LOG_LEVEL = os.getenv("THRIFTY_LOG_LEVEL", "INFO")
WORKERS = int(os.getenv("THRIFTY_WORKERS", "1"))

# ===== Size cutoffs (qubits) =====
DENSE_UNITARY_MAX_QUBITS = 12
STATEVECTOR_MAX_QUBITS = 22
CHAR_MAX_QUBITS = 8
XI_MAX_QUBITS = 6
COMMUTANT_MAX_QUBITS = 3
OMEGA_MAX_QUBITS = 2
ENUMERATION_MAX_QUBITS = 2
HAAR_SAMPLING_MAX_QUBITS = 2

# ===== Tolerances =====
ATOL_STATE = 1e-10
PSD_TOL = 1e-8


def configure_logging(level: str | None = None) -> None:
    """Root logger setup shared by the CLI and the API lifespan."""
    logging.basicConfig(
        level=(level or LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
