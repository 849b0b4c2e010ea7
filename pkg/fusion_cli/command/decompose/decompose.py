import click

from ...context_extractor import extract_api
from ...exit_codes import finish


@click.command()
@click.option('--in', 'in_path', help='Image to decompose (PGM/PPM)', required=True)
@click.option('--ckpt', help='Checkpoint holding the analysis vectors', required=True)
@click.option('--out', help='Output directory', required=True)
@click.option('--dump', is_flag=True, default=False, help='Also write each subband as a raw text tensor')
@click.pass_context
def decompose(context: click.Context, in_path: str, ckpt: str, out: str, dump: bool):
    """
    Write the four wavelet subbands and their spectra.
    """
    api = extract_api(context)
    api.log_tag('DECOMPOSE')
    finish(api, lambda: api.decompose(in_path, ckpt, out, dump=dump))
