from setuptools import setup, find_packages

from smi_couplings.__version__ import VERSION


setup(
    name="smi_couplings",
    zip_safe=False,
    version=VERSION,
    description="Builds and checks strict measurable imbedding couplings of graph products of finite groups",
    long_description=open("README.md", "r", encoding="utf-8").read(),
    license="Public Domain",
    include_package_data=True,
    packages=find_packages(exclude=["tests"]),
    entry_points={"console_scripts": "smi_couplings=smi_couplings.main:main"},
    install_requires=["networkx>=2.5", "numpy>=1.19"],
    setup_requires=["pytest_runner"],
    tests_require=open("requirements-dev.txt", "r").read().strip().split("\n"),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: CC0 1.0 Universal (CC0 1.0) Public Domain Dedication",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.7",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
