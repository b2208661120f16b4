import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="pbecf_fastica",
    version="0.1.0",
    description="Symmetric FastICA with fixed or P-bECF learned nonlinearities, with a Monte-Carlo benchmark",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="",
    packages=setuptools.find_packages(exclude=["tests"]),
    py_modules=["main"],
    package_data={"custom_logging": ["logging.yaml"]},
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "PyYAML>=6.0",
    ],
    extras_require={"test": ["pytest>=7"]},
    entry_points={"console_scripts": ["pbecf-ica=main:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
