from setuptools import setup

setup(
    name="overrideradar",
    version="0.1.0",
    description="Natural error rate of credit rating models and override-rate monitoring",
    py_modules=[
        "numerics", "rating_core", "error_rate", "calibration", "monitoring",
        "data_files", "repro", "cli", "app", "config", "errors",
    ],
    python_requires=">=3.9",
    install_requires=[
        "flask", "pandas>=1.5", "openpyxl", "python-dotenv", "numpy", "scipy", "click",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["overrideradar = cli:main"]},
)
