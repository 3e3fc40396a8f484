"""``rfir-extract`` command line."""

from pathlib import Path

import click

from .encoders import EncoderLoadFailure
from .extract import ExtractionJob, MissingLabelRecord, extract


@click.command()
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--labels", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--encoder", default="patch-mean-16", show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--out-prefix", required=True)
def main(images, labels, encoder, batch_size, out_prefix):
    """Encode an image directory into a .rfe + .jsonl pair."""
    job = ExtractionJob(
        image_dir=Path(images),
        label_path=Path(labels),
        encoder_name=encoder,
        batch_size=batch_size,
        out_prefix=out_prefix,
    )
    try:
        result = extract(job)
    except (EncoderLoadFailure, MissingLabelRecord, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))
    click.echo(
        f"wrote {result.rfe_path} and {result.manifest_path} "
        f"({result.count} items, dim {result.dim})"
    )
    if result.skipped:
        click.echo(f"skipped unreadable images: {result.skipped}", err=True)


if __name__ == "__main__":
    main()
