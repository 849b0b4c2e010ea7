import click

from ...context_extractor import extract_api
from ...exit_codes import finish


@click.command()
@click.option('--a', 'a_path', help='First source image (PGM/PPM)', required=True)
@click.option('--b', 'b_path', help='Second source image (PGM/PPM)', required=True)
@click.option('--ckpt', help='Model checkpoint', required=True)
@click.option('--out', help='Fused image path', required=True)
@click.option('--color', type=click.Choice(['a', 'b']), default=None,
              help='Recombine the chroma of this color source')
@click.pass_context
def fuse(context: click.Context, a_path: str, b_path: str, ckpt: str, out: str, color: str):
    """
    Fuse two aligned images.
    """
    api = extract_api(context)
    api.log_tag('FUSE')
    finish(api, lambda: api.fuse_images(a_path, b_path, ckpt, out, color))
