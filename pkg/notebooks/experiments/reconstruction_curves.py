# /// script
# requires-python = ">=3.12"
# dependencies = [
#     "marimo>=0.10.9",
#     "prefect>=3.0.0",
#     "numpy>=1.26.0",
#     "polars>=1.0.0",
#     "altair>=5.0.0",
#     "pydantic>=2.0.0",
# ]
# ///

import marimo

__generated_with = "0.18.4"
app = marimo.App(width="medium")

with app.setup:
    from prefect import task, flow
    from pathlib import Path
    import math
    import polars as pl
    import altair as alt
    from src.services.data_io import split, synth_images
    from src.services.nn_core import AdamConfig, get_preset, mirror_decoder
    from src.services.boosted_ensemble import (
        BoostConfig,
        as_ensemble,
        train_boosted,
        train_single_ae,
    )
    from src.services.persistence import EvalReport, emit_report, save_model, trace_frame

# ============================================================
# TASKS
# ============================================================


@app.function
@task
def make_bar_images(n: int, size: int, seed: int):
    """Synthetic bar images split 80/20 into train and validation."""
    dataset = synth_images(n, size=size, seed=seed)
    train, val, _ = split(dataset, (0.8, 0.2, 0.0), seed=seed)
    return train, val


@app.function
@task
def train_boosted_task(
    preset_name: str, train, val, M: int, I: int, Q: int, seed: int  # noqa: E741
):
    preset = get_preset(preset_name)
    decoder = mirror_decoder(preset.encoder, preset.hidden_activation)
    config = BoostConfig(
        M=M,
        I=I,
        Q=Q,
        adam=AdamConfig(learning_rate=preset.learning_rate),
        seed=seed,
        validate_every=max(1, I // 10),
    )
    return train_boosted(preset.encoder, decoder, train, val, config)


@app.function
@task
def train_single_task(preset_name: str, train, val, presentations: int, Q: int, seed: int):
    """Single autoencoder with as many sample presentations as the boosted run."""
    preset = get_preset(preset_name)
    decoder = mirror_decoder(preset.encoder, preset.hidden_activation)
    epochs = max(1, math.ceil(presentations / len(train)))
    batches = math.ceil(len(train) / Q)
    (encoder, dec), trace = train_single_ae(
        preset.encoder,
        decoder,
        train,
        val,
        epochs=epochs,
        batch_size=Q,
        adam=AdamConfig(learning_rate=preset.learning_rate),
        seed=seed,
        validate_every=max(1, batches // 2),
    )
    return as_ensemble(encoder, dec), trace


@app.function
@task
def curves_frame(boosted_trace, single_trace) -> pl.DataFrame:
    """Validation MSE against sample presentations for both runs."""
    frames = []
    for label, trace in (("boosted", boosted_trace), ("single-ae", single_trace)):
        report = EvalReport(kind="curve", trace=list(trace.rows))
        frames.append(
            trace_frame(report)
            .filter(pl.col("val_mse").is_not_null())
            .select("samples_seen", "val_mse")
            .with_columns(model=pl.lit(label))
        )
    return pl.concat(frames)


@app.function
@task
def curves_chart(curves: pl.DataFrame):
    return (
        alt.Chart(curves)
        .mark_line(point=True)
        .encode(
            x=alt.X("samples_seen", title="Sample presentations"),
            y=alt.Y("val_mse", title="Validation MSE", scale=alt.Scale(type="log")),
            color="model",
        )
        .properties(width=600, title="Reconstruction error during validation")
    )


# ============================================================
# FLOW
# ============================================================


@app.function
@flow(name="reconstruction-curves", log_prints=True)
def run_reconstruction_curves(
    preset_name: str = "desk-dense",
    n: int = 2500,
    size: int = 8,
    M: int = 5,
    I: int = 200,  # noqa: E741
    Q: int = 16,
    seed: int = 0,
    output_dir: str = "./outputs/reconstruction",
):
    """Boosted ensemble against a single autoencoder on bar images."""
    train, val = make_bar_images(n, size, seed)
    boosted, boosted_trace = train_boosted_task(preset_name, train, val, M, I, Q, seed)
    single, single_trace = train_single_task(preset_name, train, val, M * I * Q, Q, seed)

    curves = curves_frame(boosted_trace, single_trace)
    out = Path(output_dir)
    for label, model, trace in (
        ("boosted", boosted, boosted_trace),
        ("single-ae", single, single_trace),
    ):
        report = EvalReport(
            kind=f"train-{label}",
            config={"preset": preset_name, "n": n, "M": M, "I": I, "Q": Q, "seed": seed},
            trace=list(trace.rows),
        )
        report.add_metric("val_mse", trace.final_val_mse, seed=seed)
        emit_report(report, out / label)
        save_model(model, out / label / "model.bae")

    print(
        f"Final validation MSE: boosted {boosted_trace.final_val_mse:.5f}, "
        f"single AE {single_trace.final_val_mse:.5f}"
    )
    return {
        "boosted_val_mse": boosted_trace.final_val_mse,
        "single_val_mse": single_trace.final_val_mse,
        "curves": curves,
    }


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
        preset_selector = mo.ui.dropdown(
            options=["desk-dense", "desk-conv"], value="desk-dense", label="Preset"
        )
        encoders_slider = mo.ui.slider(start=1, stop=8, step=1, value=5, label="Encoders (M)")
        iterations_slider = mo.ui.slider(
            start=20, stop=500, step=20, value=200, label="Iterations per stage (I)"
        )
        seed_input = mo.ui.number(start=0, stop=1000, value=0, label="Seed")
        run_button = mo.ui.run_button(label="Train")
    return encoders_slider, iterations_slider, preset_selector, run_button, seed_input


@app.cell
def _(encoders_slider, iterations_slider, mo, preset_selector, run_button, seed_input):
    if mo.app_meta().mode == "edit":
        mo.vstack(
            [
                mo.md("# Boosted vs. single autoencoder"),
                preset_selector,
                encoders_slider,
                iterations_slider,
                seed_input,
                run_button,
            ]
        )
    return


@app.cell
def _(encoders_slider, iterations_slider, mo, preset_selector, run_button, seed_input):
    result = None
    if mo.app_meta().mode == "edit" and run_button.value:
        result = run_reconstruction_curves(
            preset_name=preset_selector.value,
            M=encoders_slider.value,
            I=iterations_slider.value,
            seed=int(seed_input.value),
            output_dir="./outputs/reconstruction_test",
        )
    return (result,)


@app.cell
def _(mo, result):
    if mo.app_meta().mode == "edit" and result is not None:
        mo.vstack(
            [
                mo.md(
                    f"**Boosted:** {result['boosted_val_mse']:.5f} &nbsp; "
                    f"**Single AE:** {result['single_val_mse']:.5f}"
                ),
                mo.ui.altair_chart(curves_chart(result["curves"])),
            ]
        )
    return


# ============================================================
# SCRIPT EXECUTION (production)
# ============================================================


@app.cell
def _(mo):
    if mo.app_meta().mode == "script":
        run_reconstruction_curves()
    return


if __name__ == "__main__":
    app.run()
