import csv
import io
import json
import logging
import math
import os
from textwrap import dedent

from jinja2 import Environment, StrictUndefined
from jinja2.exceptions import UndefinedError

from . import utils

log = logging.getLogger("radarscout")

RUN_COLUMNS = ["label", "mode", "seed", "n_agents", "alpha_e", "alpha_u", "alpha_s", "found", "t_found", "hp_attempts", "coverage", "error", "log"]


def cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""
        return repr(value)
    if isinstance(value, dict):
        return ", ".join("{}={}".format(k, cell(v)) for k, v in value.items())
    return str(value)


def csv_row(row, columns):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="").writerow([cell(row.get(c)) for c in columns])
    return buf.getvalue()


def md_row(values, columns=None):
    cells = values if columns is None else [cell(values.get(c)) for c in columns]
    return "| " + " | ".join(str(c) for c in cells) + " |"


def md_rule(columns):
    return "|" + " --- |" * len(columns)


def _columns(rows):
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def environment():
    env = Environment(
        keep_trailing_newline=True,
        lstrip_blocks=True,
        trim_blocks=True,
        undefined=StrictUndefined,
    )
    env.globals.update(generated_header=utils.generated_header)
    env.filters.update(cell=cell, csv_row=csv_row, md_row=md_row, md_rule=md_rule)
    return env


class ReportBuilder(utils.Tasks):
    """Tables, summary and manifest for one experiment result."""

    templates_base = "templates"

    def __init__(self, result, spec):
        self.result = result
        self.spec = spec
        self.tasks = {}

    def context(self):
        return {
            "kind": self.result.kind,
            "scenarios": self.spec.scenarios,
            "seeds": self.spec.seeds,
            "runs": self.result.runs,
            "errors": len(self.result.errors),
            "extra": self.result.extra,
            "rows": self.result.table,
            "columns": _columns(self.result.table),
        }

    def manifest(self):
        return {
            "kind": self.result.kind,
            "scenarios": self.spec.scenarios,
            "seeds": self.spec.seeds,
            "settings": self.spec.settings.as_dict(),
            "result": self.result.as_dict(),
        }

    def build(self):
        kind = self.result.kind
        table = self.result.table
        self.task_template("{}.csv".format(kind), "table.csv.j2", context={"rows": table, "columns": _columns(table)})
        self.task_template("runs.csv", "table.csv.j2", context={"rows": self.result.runs, "columns": RUN_COLUMNS})
        self.task_template("summary.md", "summary.md.j2")
        self.task_content("manifest.json", json.dumps(self.manifest(), indent=2, sort_keys=True, default=utils.json_default) + "\n")
        log.debug("Discovered {:d} report tasks".format(len(self.tasks)))
        return self.tasks

    def render(self):
        rendered = {}
        for path, task in self.tasks.items():
            if task.get("content") is not None:
                rendered[path] = task["content"]
                continue
            context = self.context()
            context.update(task.get("context") or {})
            template_path = task.get("template_path")
            if template_path is None:
                template = task["template"]
            else:
                with open(template_path, "r") as f:
                    template = f.read()
            tmpl = environment().from_string(dedent(template))
            try:
                rendered[path] = tmpl.render(context)
            except UndefinedError:
                log.error("An exception occured while rendering report '{}'".format(path))
                raise
        return rendered

    def run(self, output_dir):
        if not self.tasks:
            self.build()
        rendered = self.render()
        os.makedirs(output_dir, exist_ok=True)
        for relpath, content in rendered.items():
            abspath = os.path.join(output_dir, relpath)
            log.debug("Writing report to '{}'".format(abspath))
            with open(abspath, "w") as f:
                f.write(content)
        return rendered
