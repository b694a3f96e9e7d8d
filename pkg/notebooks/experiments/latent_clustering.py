# /// script
# requires-python = ">=3.12"
# dependencies = [
#     "marimo>=0.10.9",
#     "prefect>=3.0.0",
#     "numpy>=1.26.0",
#     "polars>=1.0.0",
#     "altair>=5.0.0",
#     "pydantic>=2.0.0",
#     "pyyaml>=6.0",
# ]
# ///

import marimo

__generated_with = "0.18.4"
app = marimo.App(width="medium")

with app.setup:
    from prefect import task, flow
    from pathlib import Path
    from typing import List, Optional
    import polars as pl
    import altair as alt
    from src.cli.cli_models import load_run_config
    from src.cli.cli_service import cmd_eval_cluster
    from src.services.persistence import load_report, metrics_frame, nmi_frame
    from src.shared_utils.config import get_settings

# ============================================================
# TASKS
# ============================================================


@app.function
@task
def resolve_config(
    config_path: Optional[str],
    reducers: Optional[List[str]],
    seed: int,
    desk_scale: bool,
    output_dir: str,
):
    """Run configuration with the flow parameters applied."""
    config = load_run_config(Path(config_path) if config_path else None)
    update = {"seed": seed, "desk_scale": desk_scale, "output_dir": Path(output_dir)}
    if reducers is not None:
        update["cluster"] = config.cluster.model_copy(update={"reducers": reducers})
    return config.model_copy(update=update).resolve(get_settings().output_directory)


@app.function
@task
def evaluate(config):
    """Encode, cluster and score with every configured reducer."""
    cmd_eval_cluster(config)
    report = load_report(config.output_dir)
    per_seed = metrics_frame(report).filter(pl.col("name") == "nmi")
    return nmi_frame(report), per_seed


@app.function
@task
def nmi_chart(per_seed: pl.DataFrame):
    return (
        alt.Chart(per_seed)
        .mark_boxplot()
        .encode(x=alt.X("reducer:N", title="Reducer"), y=alt.Y("value", title="NMI"))
        .properties(width=400, title="NMI across K-means seeds")
    )


# ============================================================
# FLOW
# ============================================================


@app.function
@flow(name="latent-clustering", log_prints=True)
def run_latent_clustering(
    config_path: Optional[str] = None,
    reducers: Optional[List[str]] = None,
    seed: int = 0,
    desk_scale: bool = True,
    output_dir: str = "./outputs/clustering",
):
    """K-means in the latent space of autoencoders against PCA."""
    config = resolve_config(config_path, reducers, seed, desk_scale, output_dir)
    table, per_seed = evaluate(config)
    for row in table.iter_rows(named=True):
        print(
            f"{row['reducer']}: NMI best {row['nmi_best']:.4f}, "
            f"mean {row['nmi_mean']:.4f} ± {row['nmi_std']:.4f}"
        )
    return {"nmi": table, "per_seed": per_seed}


# ============================================================
# INTERACTIVE CELLS (edit mode only)
# ============================================================


@app.cell
def _():
    import marimo as mo

    return (mo,)


@app.cell
def _(mo):
    if mo.app_meta().mode == "edit":
        config_input = mo.ui.text(value="", label="Run config (YAML, empty for defaults)")
        reducers_select = mo.ui.multiselect(
            options=["ensemble", "single-ae", "pca"],
            value=["ensemble", "single-ae", "pca"],
            label="Reducers",
        )
        desk_toggle = mo.ui.checkbox(value=True, label="Desk scale")
        run_button = mo.ui.run_button(label="Cluster")
    return config_input, desk_toggle, reducers_select, run_button


@app.cell
def _(config_input, desk_toggle, mo, reducers_select, run_button):
    if mo.app_meta().mode == "edit":
        mo.vstack(
            [
                mo.md("# Latent-space clustering"),
                config_input,
                reducers_select,
                desk_toggle,
                run_button,
            ]
        )
    return


@app.cell
def _(config_input, desk_toggle, mo, reducers_select, run_button):
    result = None
    if mo.app_meta().mode == "edit" and run_button.value:
        result = run_latent_clustering(
            config_path=config_input.value or None,
            reducers=list(reducers_select.value),
            desk_scale=desk_toggle.value,
            output_dir="./outputs/clustering_test",
        )
    return (result,)


@app.cell
def _(mo, result):
    if mo.app_meta().mode == "edit" and result is not None:
        mo.vstack(
            [
                mo.ui.table(result["nmi"], selection=None),
                mo.ui.altair_chart(nmi_chart(result["per_seed"])),
            ]
        )
    return


# ============================================================
# SCRIPT EXECUTION (production)
# ============================================================


@app.cell
def _(mo):
    if mo.app_meta().mode == "script":
        run_latent_clustering()
    return


if __name__ == "__main__":
    app.run()
