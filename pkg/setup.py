"""
trsoden - ODE networks regularized by time-reversal symmetry
"""
from setuptools import setup, find_packages

setup(
    name="trsoden",
    version="0.1.0",
    description="Learning dynamics from noisy trajectories with time-reversal symmetric ODE networks",
    author="trsoden developers",
    python_requires=">=3.9",
    packages=find_packages(exclude=["tests", "tests.*", "scripts", "docs"]),
    package_data={"experiments": ["presets/*.json"]},
    install_requires=[
        # Read from requirements.txt
        line.split("#")[0].strip()
        for line in open("requirements.txt")
        if line.strip() and not line.startswith("#")
    ],
    entry_points={
        "console_scripts": [
            "trsoden=cli.main:main",
        ],
    },
)
