import json

import click
import numpy as np
import pandas as pd

import console


def _to_builtin(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


class ResultWriter:
    """Writes a command's result to --out or to stdout.

    JSON is the canonical form; CSV is the flat table of the same run.
    """

    def __init__(self, out=None, fmt='json'):
        self.out = out
        self.fmt = fmt

    def write(self, payload, table=None):
        if self.fmt == 'csv':
            if table is None:
                table = pd.json_normalize(payload, sep='_')
            self.export_to_csv(pd.DataFrame(table))
        else:
            self.export_to_json(payload)

    def export_to_csv(self, df):
        self._emit(df.to_csv(index=False), f"{len(df)} rows")

    def export_to_json(self, payload):
        text = json.dumps(payload, indent=2, sort_keys=True, default=_to_builtin) + "\n"
        self._emit(text, "JSON report")

    def _emit(self, text, what):
        if self.out is None:
            click.echo(text, nl=False)
            return
        with open(self.out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        console.ok(f"Exported {what} to {self.out}")
