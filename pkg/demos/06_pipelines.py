"""Declarative pipelines from XML configurations.

Fallback mode reproduces the two-branch flow: the relational query runs
first, and only when it comes back empty does the ML branch train on its
input query and return predictions. Fuse mode always runs both branches and
joins them. The same configs drive the CLI (`polyquery run`) and the HTTP
service; here we call the orchestrator directly.
"""
from pathlib import Path

from polyquery import Engine, execute_pipeline, parse_db_config, parse_ml_config
from polyquery.cli import format_table

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
CONFIGS = DATA / "configs"

engine = Engine(DATA)
db = parse_db_config((CONFIGS / "demo_db.xml").read_text())

print("=== Fallback: empty relational result, so the ML branch runs ===")
cfg = parse_ml_config((CONFIGS / "demo_kmeans.xml").read_text())
outcome = execute_pipeline(cfg, db, engine)
print("branches:", sorted(outcome.branches_run))
print("timings (ms):", {k: round(v, 1) for k, v in outcome.timings_ms.items()})
print("model:", {k: outcome.model_summary[k] for k in ("algorithm", "k", "inertia")})
print(format_table(outcome.result, limit=6))

print("\n=== Fallback: non-empty relational result, ML skipped ===")
populated = parse_ml_config(
    (CONFIGS / "demo_kmeans.xml")
    .read_text()
    .replace("SELECT * FROM trips WHERE fare &lt; 0", "SELECT * FROM trips WHERE fare &gt; 40")
)
outcome = execute_pipeline(populated, db, engine)
print("branches:", sorted(outcome.branches_run))
print(format_table(outcome.result, limit=6))

print("\n=== Fuse: both branches joined on trip_id ===")
fused = parse_ml_config((CONFIGS / "demo_fuse.xml").read_text())
outcome = execute_pipeline(fused, db, engine)
print("branches:", sorted(outcome.branches_run))
print(format_table(outcome.result, limit=6))
