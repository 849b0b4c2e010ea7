import click

from ...context_extractor import extract_api
from ...exit_codes import finish


@click.command()
@click.option('--ckpt', help='Checkpoint to describe', required=True)
@click.pass_context
def info(context: click.Context, ckpt: str):
    """
    Show a checkpoint's configuration and parameter count.
    """
    api = extract_api(context)
    api.log_tag('INFO')
    finish(api, lambda: api.describe_checkpoint(ckpt))
