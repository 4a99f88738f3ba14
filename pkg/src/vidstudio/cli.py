"""Command line mirror of the service: train, eval-fid, pipeline, serve,
plus corpus/catalog seeding utilities for headless demos and fixtures."""

from __future__ import annotations

import io
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import fid as fid_mod
from . import kwx
from .catalog import Catalog
from .errors import StudioError
from .gan import (
    TrainConfig,
    load_checkpoint,
    load_dataset,
    make_shapes_corpus,
    save_checkpoint,
    train_evolutionary,
    train_text_to_image,
)
from .media import DEFAULT_FPS, build_manifest, compose, pcm_to_wav


def _data_root(value: str | None) -> Path:
    root = value or os.environ.get("STUDIO_DATA_ROOT") or "./studio-data"
    return Path(root)


@click.group()
def main() -> None:
    """Sentence-to-narrated-video studio."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="override the config seed")
def train(config_path: str, checkpoint_dir: str, seed: int | None) -> None:
    """Run the single-frame stage then the frame-doubling stages."""
    config = TrainConfig.load(config_path)
    if seed is not None:
        config.seed = seed
    dataset = load_dataset(config.dataset_path)
    state = train_text_to_image(config, dataset)
    state = train_evolutionary(state, config, dataset, config.n_stages)
    save_checkpoint(state, checkpoint_dir)
    click.echo(f"checkpoint written to {checkpoint_dir} (stage {state.stage})")


@main.command("eval-fid")
@click.option("--checkpoint", "checkpoint_dir", required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--frames", type=int, default=64, show_default=True)
@click.option("--extractor", type=click.Choice(["default", "identity"]), default="default")
@click.option("--label", default="with the text", show_default=True)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
def eval_fid(checkpoint_dir, dataset_path, frames, extractor, label, csv_path) -> None:
    """Compute FID between generated and real frames."""
    state = load_checkpoint(checkpoint_dir)
    dataset = load_dataset(dataset_path)
    chosen = (
        fid_mod.IdentityExtractor()
        if extractor == "identity"
        else fid_mod.default_extractor(state.config.frame_size, state.config.channels)
    )
    report = fid_mod.evaluate(
        state, dataset, frames_per_method=frames, extractor=chosen, label=label
    )
    click.echo(report.to_table())
    if csv_path:
        Path(csv_path).write_text(report.to_csv(), encoding="utf-8")
        click.echo(f"csv written to {csv_path}")


@main.command()
@click.option("--sentence", required=True)
@click.option("--catalog", "catalog_root", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--max-terms", type=int, default=8, show_default=True)
@click.option("--images-per-term", type=int, default=1, show_default=True)
@click.option("--fps", type=int, default=DEFAULT_FPS, show_default=True)
@click.option("--muxer", type=click.Choice(["auto", "ffmpeg", "builtin", "bundle"]),
              default="auto", show_default=True)
def pipeline(sentence, catalog_root, out_dir, max_terms, images_per_term, fps, muxer):
    """One-shot sentence -> video using top-ranked candidates automatically."""
    catalog = Catalog(catalog_root)
    text = kwx.normalize_text(sentence)
    terms = kwx.extract_terms(text, max_terms)
    if not terms.terms:
        raise click.ClickException("no terms extracted from the sentence")
    selections: dict[str, list[str]] = {}
    for term in terms.terms:
        ranked = catalog.rank_candidates(term.term)
        if ranked:
            selections[term.term] = [a.asset_id for a in ranked[:images_per_term]]
    if not selections:
        raise click.ClickException("catalog has no images for any extracted term")
    try:
        manifest = build_manifest(terms, selections, catalog, fps=fps)
        result = compose(manifest, catalog, out_dir, muxer=muxer)
    except StudioError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"terms: {', '.join(t.term for t in terms.terms)}")
    click.echo(f"manifest: {result.manifest_path}")
    click.echo(f"silent:   {result.silent_path}")
    if result.final_path:
        click.echo(f"final:    {result.final_path}")
    else:
        click.echo(f"bundle:   {result.bundle_dir}")


@main.command()
@click.option("--catalog", "catalog_root", required=True, type=click.Path())
@click.option("--data-root", default=None, help="defaults to $STUDIO_DATA_ROOT")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--asr-table", type=click.Path(exists=True), default=None,
              help="JSON file {sha256(audio): transcript} enabling the mock ASR")
@click.option("--muxer", type=click.Choice(["auto", "ffmpeg", "builtin", "bundle"]),
              default="auto", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="serve a built frontend directory at /")
def serve(catalog_root, data_root, port, host, asr_table, muxer, ui_dir) -> None:
    """Run the HTTP studio service."""
    import uvicorn

    from .service import StudioContext, create_app

    asr = kwx.MockASR.from_json_file(asr_table) if asr_table else None
    ctx = StudioContext(
        data_root=_data_root(data_root),
        catalog=Catalog(catalog_root),
        asr=asr,
        muxer=muxer,
    )
    app = create_app(ctx)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)


@main.command("make-corpus")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--frame-size", type=int, default=32, show_default=True)
@click.option("--frames", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jitter", type=int, default=0, show_default=True)
def make_corpus(out_dir, frame_size, frames, seed, jitter) -> None:
    """Render the synthetic shapes corpus (64 captioned clips)."""
    root = make_shapes_corpus(out_dir, frame_size=frame_size, n_frames=frames,
                              seed=seed, jitter=jitter)
    click.echo(f"corpus written to {root}")


@main.command("seed-catalog")
@click.option("--catalog", "catalog_root", required=True, type=click.Path())
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None,
              help="seed images from a clip dataset's first frames")
@click.option("--checkpoint", "checkpoint_dir", type=click.Path(exists=True), default=None,
              help="also store generated frames from this checkpoint")
@click.option("--audio/--no-audio", default=True, show_default=True,
              help="store a synthesized tone per term")
def seed_catalog(catalog_root, dataset_path, checkpoint_dir, audio) -> None:
    """Populate a catalog with per-term images (and tones) for demos."""
    from PIL import Image

    catalog = Catalog(catalog_root)
    count = 0
    if dataset_path:
        dataset = load_dataset(dataset_path)
        for clip in dataset.clips:
            terms = [t for t in clip.tokens if t not in kwx.STOPWORDS]
            frame = ((clip.frames[0].permute(1, 2, 0).numpy() + 1) * 127.5).astype("uint8")
            buf = io.BytesIO()
            Image.fromarray(frame).save(buf, format="PNG")
            for term in terms:
                catalog.put_image(term, buf.getvalue(), origin="library")
                count += 1
                if audio and not catalog.has_audio(term):
                    catalog.put_audio(term, _tone_for(term))
    if checkpoint_dir:
        import torch

        from .gan.state import NoiseSeed, TextEmbedding, generate_frames

        state = load_checkpoint(checkpoint_dir)
        rng = torch.Generator()
        rng.manual_seed(state.config.seed + 1)
        for term in catalog.terms():
            phi = state.encoder(state.encoder.token_ids((term,))).detach().numpy()
            z0 = torch.randn(state.config.z_dim, generator=rng).numpy()
            zs = [
                torch.randn(state.config.z_dim, generator=rng).numpy()
                for _ in range(2**state.stage)
            ]
            seq = generate_frames(
                state,
                TextEmbedding(phi=phi),
                NoiseSeed(z=z0),
                [NoiseSeed(z=z) for z in zs],
                state.stage,
            )
            frame = ((seq.frames[0] + 1) * 127.5).astype("uint8")
            buf = io.BytesIO()
            Image.fromarray(frame).save(buf, format="PNG")
            catalog.put_image(term, buf.getvalue(), origin="generated")
            count += 1
    click.echo(f"stored {count} images across {len(catalog.terms())} terms")


def _tone_for(term: str, seconds: float = 2.0) -> bytes:
    """Deterministic sine tone; frequency derived from the term's spelling."""
    freq = 220.0 + (sum(term.encode("utf-8")) % 64) * 10.0
    t = np.arange(int(seconds * 16000)) / 16000
    envelope = np.minimum(1.0, np.minimum(t / 0.05, (seconds - t) / 0.05))
    samples = (np.sin(2 * np.pi * freq * t) * envelope * 12000).astype(np.int16)
    return pcm_to_wav(samples.tobytes())


if __name__ == "__main__":
    sys.exit(main())
