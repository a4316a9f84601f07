from setuptools import setup, find_packages
from pathlib import Path

DESCRIPTION = 'Certified error-floor bounds for regular LDPC code ensembles'
LONG_DESCRIPTION = Path('README.md').read_text()

exec(open('ldpcert/version.py').read())

setup(
    name="ldpcert",
    version=__version__,
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Communications"
        ],
    keywords=[
        "ldpc",
        "error-correcting-codes",
        "belief-propagation",
        "lp-decoding",
        "error-floor",
        "union-bound",
        "monte-carlo",],
    python_requires=">=3.8",
    install_requires=["numpy", "pandas", "joblib", "scipy>=1.6"],
    extras_require={"tests": ["pytest"]},
    entry_points={"console_scripts": ["ldpcert=ldpcert.cli:main"]},
)
