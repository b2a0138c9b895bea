"""Exception hierarchy. Every user-facing failure carries a stable machine code."""


class EngineError(Exception):
    """Base class for all errors the engine reports to callers."""

    code = "engine"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class CatalogError(EngineError):
    code = "catalog"


class SchemaInferenceError(EngineError):
    code = "schema_inference"


class ScanError(EngineError):
    code = "scan"


class SqlSyntaxError(EngineError):
    """Parse failure with a 1-based source position and the offending token."""

    code = "syntax"

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        near = f" near {token!r}" if token else ""
        super().__init__(f"syntax error at {line}:{column}{near}: {message}")


class PlanError(EngineError):
    code = "plan"


class ExecutionError(EngineError):
    code = "execution"


class MLError(EngineError):
    code = "ml"


class GraphError(EngineError):
    code = "graph"


class ConfigError(EngineError):
    code = "config"


class PipelineError(EngineError):
    code = "pipeline"


class JobError(EngineError):
    code = "job"
