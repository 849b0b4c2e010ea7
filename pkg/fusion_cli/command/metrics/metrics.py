import click

from ...context_extractor import extract_api
from ...exit_codes import finish


@click.command()
@click.option('--fused', help='Directory of fused images', required=True)
@click.option('--a', 'a_dir', help='Directory of first sources', required=True)
@click.option('--b', 'b_dir', help='Directory of second sources', required=True)
@click.option('--csv', 'csv_path', help='Output CSV path', required=True)
@click.pass_context
def metrics(context: click.Context, fused: str, a_dir: str, b_dir: str, csv_path: str):
    """
    Score fused images against their sources.
    """
    api = extract_api(context)
    api.log_tag('METRICS')
    finish(api, lambda: api.evaluate_directory(fused, a_dir, b_dir, csv_path))
