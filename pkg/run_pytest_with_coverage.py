# run_pytest_with_coverage.py
"""
Run the test suite with coverage over the toolkit modules. Fails with exit code 1 if coverage is below threshold.
"""
import sys
import subprocess

COVERAGE_THRESHOLD = 85  # percent

MODULES = ["core", "domains", "sampling", "solvers", "reductions", "analysis", "microscope",
           "election_file", "experiments", "cli", "db", "routes", "utils"]

result = subprocess.run(
    [sys.executable, "-m", "pytest"]
    + [f"--cov={m}" for m in MODULES]
    + ["--cov-report=term-missing", "--cov-fail-under=%d" % COVERAGE_THRESHOLD]
)

sys.exit(result.returncode)
