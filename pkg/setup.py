from setuptools import setup, find_packages

setup(
    name="coderet",
    version="0.1.0",
    description="Contrastive code retrieval: mined code-code and code-text pairs, a compact dual encoder and retrieval evaluation",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(include=["coderet", "coderet.*"]),
    include_package_data=True,
    package_data={"coderet": ["toy/*.json", "toy/*.jsonl", "toy/corpus/*/*"]},
    py_modules=['cli'],
    install_requires=[
        "click>=8.0",
        "pandas>=1.0",
        "tqdm>=4.0",
        "pyyaml>=6.0",
        "numpy>=1.21",
        "scikit-learn>=1.0.0",
        "scipy>=1.7.0"
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "coderet=cli:cli"
        ]
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Topic :: Software Development",
        "Topic :: Scientific/Engineering :: Artificial Intelligence"
    ],
    keywords="code search, contrastive learning, dense retrieval, embeddings",
    python_requires=">=3.8",
)
