"""Declarative pipelines: XML configs driving a relational branch plus an
optional ML branch.

The config grammar (all element names literal):

    <configuration>
      <input>
        <database>
          <url>local:DIR</url> <user>U</user> <password>P</password>
          <sql>SELECT ...</sql>
        </database>
      </input>
      <parameter><value>...</value>*</parameter>
      <algorithm>KMeans</algorithm>
      <primary_sql>SELECT ...</primary_sql>
      <mode>Fallback|Fuse</mode>
      <features><col>NAME</col>*</features>
      <label>NAME</label>
      <join><key>NAME</key>*</join>
    </configuration>

url/user/password may be omitted and inherit from the separately supplied
database config. Fallback mode runs the ML branch only when the relational
branch returns zero rows; Fuse always runs both and joins the results.
Unknown elements are rejected unless ignore_unknown is set.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional
from xml.etree import ElementTree

from .errors import ConfigError, PipelineError
from .ml import make_estimator
from .model import Column, ColumnType, Relation, Schema

logger = logging.getLogger(__name__)

LOCAL_SCHEME = "local:"

_NUMERIC = (ColumnType.INT64, ColumnType.FLOAT64)


class PipelineMode(str, Enum):
    FALLBACK = "Fallback"
    FUSE = "Fuse"


@dataclass(frozen=True)
class DbConfig:
    url: str
    user: str = ""
    password: str = ""

    def local_dir(self) -> str:
        if not self.url.startswith(LOCAL_SCHEME):
            raise ConfigError(
                f"unsupported database url scheme in {self.url!r}; only the "
                f"{LOCAL_SCHEME}<catalog-dir> connector is implemented"
            )
        return self.url[len(LOCAL_SCHEME):]


@dataclass(frozen=True)
class InlineDb:
    url: Optional[str] = None
    user: Optional[str] = None
    password: Optional[str] = None

    def merged_with(self, fallback: DbConfig) -> DbConfig:
        return DbConfig(
            url=self.url if self.url is not None else fallback.url,
            user=self.user if self.user is not None else fallback.user,
            password=self.password if self.password is not None else fallback.password,
        )


@dataclass(frozen=True)
class PipelineConfig:
    input_sql: str
    algorithm: str
    parameters: tuple[str, ...] = ()
    db: Optional[InlineDb] = None
    mode: PipelineMode = PipelineMode.FALLBACK
    primary_sql: Optional[str] = None
    feature_cols: Optional[tuple[str, ...]] = None
    label_col: Optional[str] = None
    join_keys: Optional[tuple[str, ...]] = None


@dataclass
class PipelineResult:
    result: Relation
    branches_run: set
    timings_ms: dict
    model_summary: Optional[dict] = None


def _parse_xml(text: str) -> ElementTree.Element:
    try:
        return ElementTree.fromstring(text)
    except ElementTree.ParseError as exc:
        raise ConfigError(f"malformed XML: {exc}") from exc


def _check_children(elem: ElementTree.Element, allowed: set, ignore_unknown: bool) -> None:
    for child in elem:
        if child.tag not in allowed:
            if ignore_unknown:
                logger.warning("ignoring unknown element <%s> inside <%s>", child.tag, elem.tag)
                continue
            raise ConfigError(f"unknown element <{child.tag}> inside <{elem.tag}>")


def _child_text(elem: ElementTree.Element, tag: str) -> Optional[str]:
    child = elem.find(tag)
    if child is None:
        return None
    return child.text or ""


def parse_db_config(xml: str) -> DbConfig:
    """Parse a standalone <database> document."""
    root = _parse_xml(xml)
    if root.tag != "database":
        raise ConfigError(f"expected <database> root element, got <{root.tag}>")
    _check_children(root, {"url", "user", "password"}, ignore_unknown=False)
    url = _child_text(root, "url")
    if url is None or url == "":
        raise ConfigError("missing <url> in database config")
    cfg = DbConfig(url=url, user=_child_text(root, "user") or "", password=_child_text(root, "password") or "")
    cfg.local_dir()  # validates the scheme
    return cfg


def parse_ml_config(xml: str, ignore_unknown: bool = False) -> PipelineConfig:
    """Parse a <configuration> pipeline document."""
    root = _parse_xml(xml)
    if root.tag != "configuration":
        raise ConfigError(f"expected <configuration> root element, got <{root.tag}>")
    _check_children(
        root,
        {"input", "parameter", "algorithm", "primary_sql", "mode", "features", "label", "join"},
        ignore_unknown,
    )

    input_elem = root.find("input")
    if input_elem is None:
        raise ConfigError("missing <input> element")
    _check_children(input_elem, {"database"}, ignore_unknown)
    database = input_elem.find("database")
    if database is None:
        raise ConfigError("missing <database> inside <input>")
    _check_children(database, {"url", "user", "password", "sql"}, ignore_unknown)
    input_sql = _child_text(database, "sql")
    if input_sql is None or input_sql.strip() == "":
        raise ConfigError("missing <sql> (the ML input query) inside <database>")

    inline_fields = {
        "url": _child_text(database, "url"),
        "user": _child_text(database, "user"),
        "password": _child_text(database, "password"),
    }
    db = None
    if any(v is not None for v in inline_fields.values()):
        db = InlineDb(**inline_fields)

    algorithm = _child_text(root, "algorithm")
    if algorithm is None or algorithm.strip() == "":
        raise ConfigError("missing <algorithm> element")

    parameters: list[str] = []
    param_elem = root.find("parameter")
    if param_elem is not None:
        _check_children(param_elem, {"value"}, ignore_unknown)
        for value in param_elem.findall("value"):
            parameters.append(value.text or "")

    mode_text = _child_text(root, "mode")
    if mode_text is None:
        mode = PipelineMode.FALLBACK
    else:
        try:
            mode = PipelineMode(mode_text)
        except ValueError:
            raise ConfigError(
                f"unknown mode {mode_text!r}; expected Fallback or Fuse"
            ) from None

    features = None
    features_elem = root.find("features")
    if features_elem is not None:
        _check_children(features_elem, {"col"}, ignore_unknown)
        features = tuple(col.text or "" for col in features_elem.findall("col"))

    join_keys = None
    join_elem = root.find("join")
    if join_elem is not None:
        _check_children(join_elem, {"key"}, ignore_unknown)
        join_keys = tuple(key.text or "" for key in join_elem.findall("key"))

    return PipelineConfig(
        input_sql=input_sql.strip(),
        algorithm=algorithm.strip(),
        parameters=tuple(parameters),
        db=db,
        mode=mode,
        primary_sql=(_child_text(root, "primary_sql") or "").strip() or None,
        feature_cols=features,
        label_col=_child_text(root, "label"),
        join_keys=join_keys,
    )


def serialize_ml_config(cfg: PipelineConfig) -> str:
    root = ElementTree.Element("configuration")
    input_elem = ElementTree.SubElement(root, "input")
    database = ElementTree.SubElement(input_elem, "database")
    if cfg.db is not None:
        for tag in ("url", "user", "password"):
            value = getattr(cfg.db, tag)
            if value is not None:
                ElementTree.SubElement(database, tag).text = value
    ElementTree.SubElement(database, "sql").text = cfg.input_sql
    if cfg.parameters:
        param = ElementTree.SubElement(root, "parameter")
        for value in cfg.parameters:
            ElementTree.SubElement(param, "value").text = value
    ElementTree.SubElement(root, "algorithm").text = cfg.algorithm
    if cfg.primary_sql is not None:
        ElementTree.SubElement(root, "primary_sql").text = cfg.primary_sql
    ElementTree.SubElement(root, "mode").text = cfg.mode.value
    if cfg.feature_cols is not None:
        features = ElementTree.SubElement(root, "features")
        for name in cfg.feature_cols:
            ElementTree.SubElement(features, "col").text = name
    if cfg.label_col is not None:
        ElementTree.SubElement(root, "label").text = cfg.label_col
    if cfg.join_keys is not None:
        join = ElementTree.SubElement(root, "join")
        for key in cfg.join_keys:
            ElementTree.SubElement(join, "key").text = key
    ElementTree.indent(root)
    return ElementTree.tostring(root, encoding="unicode") + "\n"


def serialize_db_config(cfg: DbConfig) -> str:
    root = ElementTree.Element("database")
    ElementTree.SubElement(root, "url").text = cfg.url
    ElementTree.SubElement(root, "user").text = cfg.user
    ElementTree.SubElement(root, "password").text = cfg.password
    ElementTree.indent(root)
    return ElementTree.tostring(root, encoding="unicode") + "\n"


RELATIONAL_BRANCH = "Relational"
ML_BRANCH = "ML"

STAGE_RELATIONAL = "relational"
STAGE_ML = "ml"
STAGE_JOIN = "join"


def execute_pipeline(
    cfg: PipelineConfig,
    db: DbConfig,
    engine,
    stage_callback: Optional[Callable[[str], None]] = None,
) -> PipelineResult:
    """Run the two-branch pipeline against an engine.

    Fallback: run primary_sql; if and only if it returns zero rows, run the
    ML branch (input_sql -> features -> train -> predict) and return the
    prediction relation, otherwise return the relational result untouched.
    Fuse: always run both branches and inner-join them on join_keys (or on
    all shared column names when join_keys is absent).
    """
    merged_db = (cfg.db or InlineDb()).merged_with(db)
    merged_db.local_dir()  # only the local connector exists
    if cfg.primary_sql is None:
        raise PipelineError("pipeline config has no <primary_sql> query to run")

    def notify(stage: str) -> None:
        if stage_callback is not None:
            stage_callback(stage)

    timings: dict[str, float] = {}
    branches = set()

    notify(STAGE_RELATIONAL)
    started = time.perf_counter()
    relational = engine.query(cfg.primary_sql)
    timings[STAGE_RELATIONAL] = (time.perf_counter() - started) * 1000.0
    branches.add(RELATIONAL_BRANCH)

    run_ml = cfg.mode is PipelineMode.FUSE or relational.num_rows() == 0
    model_summary = None
    ml_output = None
    if run_ml:
        notify(STAGE_ML)
        started = time.perf_counter()
        ml_output, model_summary = _run_ml_branch(cfg, engine)
        timings[STAGE_ML] = (time.perf_counter() - started) * 1000.0
        branches.add(ML_BRANCH)

    if cfg.mode is PipelineMode.FUSE:
        notify(STAGE_JOIN)
        started = time.perf_counter()
        keys = list(cfg.join_keys) if cfg.join_keys else _shared_columns(relational, ml_output)
        result = join_results(relational, ml_output, keys)
        timings[STAGE_JOIN] = (time.perf_counter() - started) * 1000.0
    elif ml_output is not None:
        result = ml_output
    else:
        result = relational

    return PipelineResult(
        result=result,
        branches_run=branches,
        timings_ms=timings,
        model_summary=model_summary,
    )


def _run_ml_branch(cfg: PipelineConfig, engine) -> tuple[Relation, dict]:
    training = engine.query(cfg.input_sql)
    feature_cols = list(cfg.feature_cols) if cfg.feature_cols else _default_features(training, cfg.label_col)
    estimator = make_estimator(cfg.algorithm, list(cfg.parameters))
    prediction = estimator.run(training, feature_cols, cfg.label_col)
    return prediction, estimator.summary()


def _default_features(relation: Relation, label_col: Optional[str]) -> list[str]:
    cols = [
        c.name
        for c in relation.schema.columns
        if c.ctype in _NUMERIC and c.name != label_col
    ]
    if not cols:
        raise PipelineError("ML input has no numeric feature columns; set <features>")
    return cols


def _shared_columns(a: Relation, b: Relation) -> list[str]:
    b_names = set(b.schema.names())
    shared = [name for name in a.schema.names() if name in b_names]
    if not shared:
        raise PipelineError("Fuse join found no shared columns; set <join><key> explicitly")
    return shared


def join_results(relational: Relation, ml: Relation, keys: list[str]) -> Relation:
    """Inner equi-join; output = relational columns then ml columns minus keys."""
    if not keys:
        raise PipelineError("join requires at least one key column")
    left_names = relational.schema.names()
    right_names = ml.schema.names()
    for key in keys:
        if key not in left_names:
            raise PipelineError(f"join key {key!r} missing from the relational result")
        if key not in right_names:
            raise PipelineError(f"join key {key!r} missing from the ML result")
    left_idx = [left_names.index(k) for k in keys]
    right_idx = [right_names.index(k) for k in keys]
    keep_right = [i for i, name in enumerate(right_names) if name not in keys]

    table: dict = {}
    for row in relational.rows():
        key = tuple(row[i] for i in left_idx)
        if any(v is None for v in key):
            continue
        table.setdefault(key, []).append(row)

    rows = []
    for row in ml.rows():
        key = tuple(row[i] for i in right_idx)
        if any(v is None for v in key):
            continue
        for match in table.get(key, ()):
            rows.append(match + tuple(row[i] for i in keep_right))

    schema = Schema(
        relational.schema.columns
        + tuple(Column(right_names[i], ml.schema.columns[i].ctype) for i in keep_right)
    )
    return Relation.from_rows(schema, rows)
