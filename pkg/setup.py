from setuptools import setup, find_packages

# Read requirements
with open("requirements.txt") as f:
    requirements = f.read().splitlines()

setup(
    name="wrightlevy",
    version="0.1.0",
    description=(
        "Wright hypergeometric functions, a two-parameter family of spectrally "
        "negative Levy processes and the laws of their exponential functionals"
    ),
    author="wrightlevy developers",
    packages=find_packages(exclude=["examples", "examples.*"]),
    package_data={"wrightlevy": ["config/*.ini", "tests/assets/*.txt"]},
    python_requires=">=3.9",
    install_requires=requirements,
    entry_points={
        "console_scripts": ["wrightlevy=wrightlevy.app.cli.main:main"],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
)
