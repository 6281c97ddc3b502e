import setuptools

import langevin


with open("README.rst", "r") as f:
    LONG_DESCRIPTION = f.read()

NAME = langevin.__title__.lower()

setuptools.setup(
    name=NAME,
    version=langevin.__version__,
    description=langevin.__description__,
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/x-rst",
    author=langevin.__author__,
    author_email=langevin.__author_email__,
    license=langevin.__licence__,
    url=langevin.__url__,
    packages=setuptools.find_packages(exclude=["tests"]),
    install_requires=[
        "matplotlib>=3.3",
        "numpy>=1.20",
        "pandas>=1.2",
        "scipy>=1.6",
        "tomli>=1.1; python_version < '3.11'",
    ],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="langevin mcmc sampling bayesian",
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "{}=langevin.core:run".format(NAME),
        ],
    },
)
