import click

from .api.fusion_api import FusionAPI
from .command.decompose.decompose import decompose
from .command.fuse.fuse import fuse
from .command.gradcheck.gradcheck import gradcheck
from .command.info.info import info
from .command.metrics.metrics import metrics
from .command.train.train import train
from .logger import Logger


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Show debug logs')
@click.pass_context
def cli(context: click.Context, verbose: bool):
    """
    Two-source image fusion with adaptive wavelets and spatial-frequency state-space blocks.
    """
    api = FusionAPI(Logger(verbose))
    context.obj = {
        'api': api
    }


cli.add_command(fuse)
cli.add_command(decompose)
cli.add_command(metrics)
cli.add_command(gradcheck)
cli.add_command(train)
cli.add_command(info)
