from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="varstring",
    version="0.1.0",
    author="varstring developers",
    description="Eigenvalues of inhomogeneous strings by perturbative, iterative and direct engines",
    long_description=long_description,
    long_description_content_type="text/markdown",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    package_data={"varstring": ["data/reference_values.json"]},
    entry_points={
        "console_scripts": [
            "varstring=varstring.cli:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21,<3.0",
        "scipy>=1.8,<2.0",
    ],
)
