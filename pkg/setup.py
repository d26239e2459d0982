""" cocalib build script for setuptools.

"""

from setuptools import find_packages, setup  # type: ignore

import cocalib

with open("README.md", "r") as file_:
    longdescription = file_.read()

setup(
    name=cocalib.name,
    version=cocalib.__version__,
    license=cocalib.__license__,
    author=cocalib.__author__,
    author_email=cocalib.__author_email__,
    description="Compactness-guided hierarchical clustering segmentation",
    long_description=longdescription,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    package_data={"cocalib": ["_data/*", "py.typed"]},
    install_requires=[
        "dataclasses_json",
        "numpy>=1.20",
        "scipy>=1.6",
        "scikit-learn>=0.24",
    ],
    entry_points={"console_scripts": ["cocalib=cocalib.cli:main"]},
    keywords=(
        "image-segmentation clustering compactness object-centric "
        "hierarchical-clustering soft-masks"
    ),
    python_requires=">=3.8",
    classifiers=[
        "Programming Language :: Python :: 3 :: Only",
        "Development Status :: 4 - Beta",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Image Recognition",
        "Topic :: Software Development :: Libraries :: Python Modules",
    ],
)
