import os
from dotenv import load_dotenv

load_dotenv()

DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./kemeny_runs.db")
OUTPUT_DIR = os.getenv("KEMENY_OUTPUT_DIR", "./runs")
LOG_LEVEL = os.getenv("KEMENY_LOG_LEVEL", "WARNING")

# Budgets; solvers take them as keyword defaults so tests can shrink them.
MAX_CANDIDATES = int(os.getenv("KEMENY_MAX_CANDIDATES", 20))  # bitmask Kemeny DP
MAX_VOTERS = int(os.getenv("KEMENY_MAX_VOTERS", 15))  # partition DP, distinct votes
MAX_SUBSETS = int(os.getenv("KEMENY_MAX_SUBSETS", 2_000_000))  # k-subset brute force
MAX_GS_CANDIDATES = int(os.getenv("KEMENY_MAX_GS_CANDIDATES", 2000))  # caterpillar reduction
MAX_H2S_STRINGS = int(os.getenv("KEMENY_MAX_H2S_STRINGS", 15))

WORKERS = int(os.getenv("KEMENY_WORKERS", 1))
