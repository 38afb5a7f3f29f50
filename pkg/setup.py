"""
Setup script for qubits
"""

from pathlib import Path

from setuptools import find_packages, setup

here = Path(__file__).parent

TEST_ONLY = ("pytest", "scikit-learn")

requirements = [
    line.strip()
    for line in (here / "requirements.txt").read_text(encoding="utf-8").splitlines()
    if line.strip() and not line.startswith("#") and not line.startswith(TEST_ONLY)
]

setup(
    name="qubits",
    version="1.0.0",
    description="Balanced time-series clustering as a QUBO problem, with a simulated-annealing solver",
    long_description=(here / "docs" / "quickstart.md").read_text(encoding="utf-8"),
    long_description_content_type="text/markdown",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={"test": ["pytest>=7.4.0", "scikit-learn>=1.3.0"]},
    entry_points={"console_scripts": ["qubits=qubits.main:main"]},
)
