from typing import Optional

import click

from ...context_extractor import extract_api
from ...exit_codes import finish


@click.command()
@click.option('--config', 'config_path', help='key=value overrides of the small model', default=None)
@click.option('--threshold', type=float, default=1e-4, help='Largest accepted relative error (default: 1e-4)')
@click.option('--entries', type=click.IntRange(min=1), default=None,
              help='Entries checked per parameter, largest gradients first (default: all)')
@click.pass_context
def gradcheck(context: click.Context, config_path: str, threshold: float, entries: Optional[int]):
    """
    Compare analytic gradients with central differences.
    """
    api = extract_api(context)
    api.log_tag('GRADCHECK')
    finish(api, lambda: api.check_gradients(config_path, threshold, entries))
