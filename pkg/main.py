#!/usr/bin/env python3
"""
qubits - balanced time-series clustering
Main Entry Point
"""

import sys
from pathlib import Path

# Add src directory to Python path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

try:
    from qubits.main import main

    if __name__ == "__main__":
        sys.exit(main())

except ImportError as e:
    print(f"Import error: qubits modules not found ({e})", file=sys.stderr)
    print("Install the requirements first: pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)
