"""Command-line interface.

Subcommand groups mirror the subsystems: ``tools`` (registry), ``ws``
(workspace), ``ci`` (code intelligence), ``bench`` (evaluation), plus
``ask`` for one-shot solving and ``serve`` for the HTTP service.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .assembly import Stack, StackConfig
from .engine.config import MODES, configure_pipeline
from .models.gateway import ModelConfig


def _load_stack(config_path: str | None, root: str | None = None,
                mode: str = "deepsolver", model: str | None = None) -> Stack:
    if config_path:
        stack_config, pipeline = StackConfig.from_file(config_path)
        if root:
            stack_config.root = Path(root)
        return Stack(stack_config, pipeline)
    model_config = ModelConfig()
    if model:
        model_config = ModelConfig.from_doc(json.loads(Path(model).read_text())
                                            if Path(model).exists()
                                            else {"backend": "http-openai-compatible",
                                                  "model_name": model})
    pipeline = configure_pipeline(mode, model=model_config)
    stack_config = StackConfig(root=Path(root or ".")).apply_env_overrides()
    return Stack(stack_config, pipeline)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="stack config file (YAML)")
@click.option("--root", default=None, help="project root override")
@click.pass_context
def main(ctx, config_path, root):
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["root"] = root


def _stack(ctx, **kwargs) -> Stack:
    return _load_stack(ctx.obj.get("config_path"), ctx.obj.get("root"), **kwargs)


# -- tools -------------------------------------------------------------------

@main.group()
def tools():
    """Tool registry operations."""


@tools.command("list")
@click.pass_context
def tools_list(ctx):
    stack = _stack(ctx)
    click.echo(json.dumps(stack.registry.descriptors_doc(), indent=2))


@tools.command("call")
@click.argument("name")
@click.option("--args", "arguments", default="{}", help="JSON argument document")
@click.pass_context
def tools_call(ctx, name, arguments):
    stack = _stack(ctx)
    invoker = stack.direct_invoker(traced=False)
    result = invoker.call(name, json.loads(arguments))
    click.echo(json.dumps(result.to_doc(), indent=2))
    sys.exit(0 if result.ok else 1)


@tools.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8700, type=int)
@click.option("--stdio", is_flag=True, help="serve JSON-RPC over stdio instead")
@click.pass_context
def tools_serve(ctx, host, port, stdio):
    from .toolbus.wire import serve_stdio, serve_wire

    stack = _stack(ctx)
    if stdio:
        serve_stdio(stack.registry)
        return
    server = serve_wire(stack.registry, host=host, port=port)
    click.echo(f"tool bus listening on {server.url}")
    try:
        import time

        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.shutdown()


# -- workspace ----------------------------------------------------------------

@main.group()
def ws():
    """Workspace execution and package management."""


@ws.command("exec")
@click.argument("file", type=click.Path(exists=True))
@click.pass_context
def ws_exec(ctx, file):
    stack = _stack(ctx)
    result = stack.workspace.execute_code(Path(file).read_text())
    click.echo(result.stdout, nl=False)
    click.echo(result.stderr, nl=False, err=True)
    sys.exit(result.exit_status if result.exit_status >= 0 else 1)


@ws.group("pkg")
def ws_pkg():
    """Package operations."""


@ws_pkg.command("list")
@click.pass_context
def ws_pkg_list(ctx):
    stack = _stack(ctx)
    report = stack.environment.list_packages()
    for entry in report.entries:
        click.echo(f"{entry.name}=={entry.version}")
    click.echo(f"({report.count} packages)")


# -- code intelligence ----------------------------------------------------------

@main.group()
def ci():
    """Code intelligence: extraction and the knowledge graph."""


@ci.command("extract")
@click.argument("url")
@click.option("--strategy", type=click.Choice(["single-page", "smart-crawl"]),
              default="single-page")
@click.option("--max-pages", default=20, type=int)
@click.pass_context
def ci_extract(ctx, url, strategy, max_pages):
    stack = _stack(ctx)
    report = stack.extractor.extract(url, strategy=strategy, max_pages=max_pages)
    click.echo(json.dumps(report.to_doc(with_embeddings=False), indent=2))


@ci.group("kg")
def ci_kg():
    """Knowledge graph build and query."""


@ci_kg.command("build")
@click.argument("path")
@click.pass_context
def ci_kg_build(ctx, path):
    from .codeintel.kg import parse_local_package

    stack = _stack(ctx)
    resolved = stack.policy.resolve(path)
    click.echo(json.dumps(parse_local_package(stack.graph, resolved), indent=2))


@ci_kg.command("query")
@click.argument("pattern")
@click.pass_context
def ci_kg_query(ctx, pattern):
    from .codeintel.kg import query_knowledge_graph

    stack = _stack(ctx)
    click.echo(json.dumps(query_knowledge_graph(stack.graph, pattern), indent=2))


# -- solving --------------------------------------------------------------------

@main.command()
@click.argument("query")
@click.option("--mode", type=click.Choice(list(MODES)), default="deepsolver")
@click.option("--model", default=None,
              help="model config file (JSON) or model name")
@click.option("--user", "user_id", default="cli-user")
@click.pass_context
def ask(ctx, query, mode, model, user_id):
    """Solve one query through the configured pipeline."""
    from .engine.deepsolver import run_deep_solver

    stack = _stack(ctx, mode=mode, model=model)
    runtime = stack.runtime()
    final = run_deep_solver(runtime, query, user_id=user_id)
    click.echo(json.dumps(final.to_doc(), indent=2))
    stack.shutdown()
    sys.exit(0 if final.success else 1)


# -- bench -----------------------------------------------------------------------

@main.group()
def bench():
    """Benchmark harness."""


@bench.command("run")
@click.option("--tasks", "tasks_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON list of benchmark configurations")
@click.option("--reps", default=3, type=int)
@click.option("--levels", default="0,1",
              help="comma-separated levels to evaluate")
@click.option("--work-dir", default="bench-out", type=click.Path())
@click.pass_context
def bench_run(ctx, tasks_dir, config_file, reps, levels, work_dir):
    from .bench.runner import BenchConfig, run_benchmark
    from .bench.tasks import load_tasks

    tasks = load_tasks(tasks_dir)
    configs = [BenchConfig.from_doc(doc)
               for doc in json.loads(Path(config_file).read_text())]
    level_tuple = tuple(int(x) for x in levels.split(",") if x != "")
    records = run_benchmark(tasks, configs, reps, work_dir,
                            levels=level_tuple)
    correct = sum(1 for r in records if r.correct)
    click.echo(f"{len(records)} attempts, {correct} correct; records in "
               f"{Path(work_dir) / 'records.ndjson'}")


@bench.command("report")
@click.argument("records", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default="bench-report", type=click.Path())
def bench_report(records, out_dir):
    from .bench.metrics import compute_difficulty, compute_metrics
    from .bench.report import emit_report
    from .bench.runner import load_records

    loaded = load_records(records)
    table = compute_metrics(loaded)
    difficulty = compute_difficulty(loaded)
    paths = emit_report(table, difficulty, out_dir)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


# -- service ---------------------------------------------------------------------

@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8720, type=int)
@click.option("--frontend", "frontend_dir", default=None,
              type=click.Path(exists=True, file_okay=False))
@click.pass_context
def serve(ctx, host, port, frontend_dir):
    """Run the session HTTP/SSE service."""
    import uvicorn

    from .sessions.api import create_app

    stack = _stack(ctx)
    app = create_app(stack, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
