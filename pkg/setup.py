import setuptools

VERSION = "0.1.0"

setuptools.setup(
    name="TorusMHD",
    version=VERSION,
    author="",
    author_email="",
    description="MHD equilibria with pressure foliations on the 3-torus",
    long_description="",
    long_description_content_type="text/markdown",
    url="",
    packages=setuptools.find_packages(exclude=["tests", "examples*"]),
    package_data={"torusmhd": ["py.typed"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
    install_requires=["numpy>=1.22"],
    entry_points={"console_scripts": ["torusmhd=torusmhd.cli:main"]},
    setup_requires=["wheel"],
    zip_safe=False,
)
