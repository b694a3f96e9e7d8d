"""
Deployment script for the experiment flows.
"""
import sys
import os

# Ensure project root is in path
sys.path.append(os.getcwd())

from notebooks.experiments.anomaly_detection import run_anomaly_detection
from notebooks.experiments.latent_clustering import run_latent_clustering
from notebooks.experiments.reconstruction_curves import run_reconstruction_curves
from src.shared_utils.config import get_settings

FLOWS = [
    (run_reconstruction_curves, "reconstruction_curves.py:run_reconstruction_curves"),
    (run_anomaly_detection, "anomaly_detection.py:run_anomaly_detection"),
    (run_latent_clustering, "latent_clustering.py:run_latent_clustering"),
]


def deploy():
    settings = get_settings()
    work_pool_name = settings.work_pool_name

    print(f"Deploying {len(FLOWS)} flows to work pool: {work_pool_name}")

    for flow_fn, entrypoint in FLOWS:
        deployment_id = flow_fn.from_source(
            source=".", entrypoint=f"notebooks/experiments/{entrypoint}"
        ).deploy(
            name=f"{flow_fn.name}-{settings.environment}",
            work_pool_name=work_pool_name,
            tags=["experiments", settings.environment],
            description=flow_fn.description,
        )
        print(f"Deployment created with ID: {deployment_id}")


if __name__ == "__main__":
    deploy()
