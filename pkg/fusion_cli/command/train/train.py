import click

from ...context_extractor import extract_api
from ...exit_codes import finish


@click.command()
@click.option('--data', help='Directory with a/ and b/ image folders', required=True)
@click.option('--config', 'config_path', help='key=value run configuration', default=None)
@click.option('--out', help='Checkpoint to write', required=True)
@click.option('--resume', help='Checkpoint to continue from', default=None)
@click.option('--steps', type=int, default=None, help='Override the configured step count')
@click.pass_context
def train(context: click.Context, data: str, config_path: str, out: str, resume: str, steps: int):
    """
    Train a model on image pairs.
    """
    api = extract_api(context)
    api.log_tag('TRAIN')
    finish(api, lambda: api.train(data, config_path, out, resume, steps))
