"""specminer 异常体系。

所有领域异常都继承 SpecMinerError，并携带 CLI 退出码：
InputError 系列对应 2，AnalysisError 系列对应 3。
"""

from core.constant import EXIT_ANALYSIS_ERROR, EXIT_INPUT_ERROR


class SpecMinerError(Exception):
    """Base class for every domain error."""

    exit_code = EXIT_ANALYSIS_ERROR


class InputError(SpecMinerError):
    """Bad or inconsistent input supplied by the user."""

    exit_code = EXIT_INPUT_ERROR


class AnalysisError(SpecMinerError):
    """An analysis phase could not produce a valid result."""

    exit_code = EXIT_ANALYSIS_ERROR


# ===== 输入错误 =====

class ManifestError(InputError):
    """Manifest file missing, malformed, or pointing at missing paths."""
    pass


class ArtifactError(InputError):
    """A JSON/CSV artifact could not be read or failed validation."""
    pass


class MiniLangSyntaxError(InputError):
    """Parse error with source position."""

    def __init__(self, line: int, col: int, expected: str, found: str = "", file: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        self.file = file
        where = f"{file}:" if file else ""
        got = f", found {found!r}" if found else ""
        super().__init__(f"{where}{line}:{col}: expected {expected}{got}")


class NameResolutionError(InputError):
    """Undeclared variable, member, or duplicate member."""
    pass


class DuplicateTypeError(InputError):
    """Two declarations share one type name."""
    pass


class UnresolvedTypeError(InputError):
    """A type reference names nothing declared."""
    pass


class InheritanceCycleError(InputError):
    """extends/implements links form a cycle."""
    pass


class NoEntrypointError(InputError):
    """No entrypoint method to start the call graph from."""
    pass


class CorpusTooSmallError(InputError):
    """Fewer than two programs to split."""
    pass


# ===== 分析错误 =====

class EmptyUsageError(AnalysisError):
    """The slice holds no framework-related statement."""
    pass


class CycleAfterAugmentationError(AnalysisError):
    """IFD order edges closed a cycle with the data edges."""
    pass


class SizeLimitExceededError(AnalysisError):
    """Graph too large for exhaustive canonicalization."""
    pass


class GraphInvariantError(AnalysisError):
    """A usage graph failed validate()."""
    pass


class NoMatchError(SpecMinerError):
    """Only the start node of a query matches the model."""
    pass


class NothingMissingError(SpecMinerError):
    """The query embeds completely; no API is missing."""
    pass
