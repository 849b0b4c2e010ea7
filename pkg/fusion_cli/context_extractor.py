import click

from .api.fusion_api import FusionAPI


def extract_api(context: click.Context) -> FusionAPI:
    return context.obj.get('api')
