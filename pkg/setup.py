from setuptools import setup, find_packages

setup(
    name="paultrap-gate-designer",
    version="1.0.0",
    description="Paul 阱离子晶体微运动工具包：周期平衡轨道、Floquet 简正模与含微运动修正的双比特门脉冲设计",
    author="Paul Trap Gate Designer",
    author_email="paultrap@example.com",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pyyaml>=6.0.1",
        "click>=8.1.7",
        "jsonschema>=4.20.0",
        "pytest>=7.4.3",
        "tabulate>=0.9.0",
        "pandas>=2.0.0",
        "psutil>=5.9.0"
    ],
    entry_points={
        'console_scripts': [
            'paultrap=src.cli.main:cli',
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
