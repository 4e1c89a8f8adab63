from setuptools import find_packages, setup

setup(
    name="patientgraph",
    version="0.1.0",
    description="LSTM-GNN patient outcome prediction over diagnosis-similarity patient graphs",
    package_dir={"": "src"},
    packages=find_packages("src"),
    include_package_data=True,
    package_data={"patientgraph": ["py.typed"]},
)
