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
    from src.cli.cli_service import cmd_eval_anomaly
    from src.services.persistence import auc_frame, load_report
    from src.shared_utils.config import get_settings

# ============================================================
# TASKS
# ============================================================


@app.function
@task
def resolve_config(
    config_path: Optional[str],
    normal_classes: Optional[List[int]],
    seed: int,
    desk_scale: bool,
    output_dir: str,
):
    """Run configuration with the flow parameters applied."""
    config = load_run_config(Path(config_path) if config_path else None)
    update = {"seed": seed, "desk_scale": desk_scale, "output_dir": Path(output_dir)}
    if normal_classes is not None:
        update["anomaly"] = config.anomaly.model_copy(update={"normal_classes": normal_classes})
    return config.model_copy(update=update).resolve(get_settings().output_directory)


@app.function
@task
def evaluate(config):
    """Train one ensemble per normal class and score its test split."""
    cmd_eval_anomaly(config)
    return auc_frame(load_report(config.output_dir))


@app.function
@task
def auc_chart(aucs: pl.DataFrame):
    overall = aucs.filter(pl.col("other_class").is_null())
    return (
        alt.Chart(overall)
        .mark_bar()
        .encode(
            x=alt.X("normal_class:O", title="Normal class"),
            y=alt.Y("auc", title="AUC", scale=alt.Scale(domain=[0, 1])),
        )
        .properties(width=500, title="One-class AUC per normal class")
    )


# ============================================================
# FLOW
# ============================================================


@app.function
@flow(name="anomaly-detection", log_prints=True)
def run_anomaly_detection(
    config_path: Optional[str] = None,
    normal_classes: Optional[List[int]] = None,
    seed: int = 0,
    desk_scale: bool = True,
    output_dir: str = "./outputs/anomaly",
):
    """One-class anomaly detection with boosted autoencoder ensembles."""
    config = resolve_config(config_path, normal_classes, seed, desk_scale, output_dir)
    aucs = evaluate(config)
    overall = aucs.filter(pl.col("other_class").is_null())
    for row in overall.iter_rows(named=True):
        print(f"Normal class {row['normal_class']}: AUC {row['auc']:.4f}")
    return {"mean_auc": float(overall["auc"].mean()), "aucs": aucs}


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
        classes_input = mo.ui.text(value="0,1", label="Normal classes")
        desk_toggle = mo.ui.checkbox(value=True, label="Desk scale")
        run_button = mo.ui.run_button(label="Evaluate")
    return classes_input, config_input, desk_toggle, run_button


@app.cell
def _(classes_input, config_input, desk_toggle, mo, run_button):
    if mo.app_meta().mode == "edit":
        mo.vstack(
            [
                mo.md("# One-class anomaly detection"),
                config_input,
                classes_input,
                desk_toggle,
                run_button,
            ]
        )
    return


@app.cell
def _(classes_input, config_input, desk_toggle, mo, run_button):
    result = None
    if mo.app_meta().mode == "edit" and run_button.value:
        result = run_anomaly_detection(
            config_path=config_input.value or None,
            normal_classes=[int(c) for c in classes_input.value.split(",") if c.strip()],
            desk_scale=desk_toggle.value,
            output_dir="./outputs/anomaly_test",
        )
    return (result,)


@app.cell
def _(mo, result):
    if mo.app_meta().mode == "edit" and result is not None:
        mo.vstack(
            [
                mo.md(f"**Mean AUC:** {result['mean_auc']:.4f}"),
                mo.ui.altair_chart(auc_chart(result["aucs"])),
                mo.ui.table(result["aucs"], selection=None),
            ]
        )
    return


# ============================================================
# SCRIPT EXECUTION (production)
# ============================================================


@app.cell
def _(mo):
    if mo.app_meta().mode == "script":
        run_anomaly_detection()
    return


if __name__ == "__main__":
    app.run()
