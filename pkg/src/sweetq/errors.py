"""Exception hierarchy. Every error carries a short machine-readable ``token``."""


class SweetqError(Exception):
    token = "error"


class ConflictingPhase(SweetqError):
    token = "conflicting_phase"


class EmptyState(SweetqError):
    token = "empty_state"


class PhaseGridTooCoarse(SweetqError):
    token = "phase_grid_too_coarse"


class AllTermsCancelled(SweetqError):
    token = "all_terms_cancelled"


class InvalidAction(SweetqError):
    token = "invalid_action"


class MalformedKey(SweetqError):
    token = "malformed_key"


class GridMismatch(SweetqError):
    token = "grid_mismatch"


class MalformedLine(SweetqError):
    token = "malformed_line"

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class SelfLoop(SweetqError):
    token = "self_loop"


class DuplicateEdge(SweetqError):
    token = "duplicate_edge"


class VertexOutOfRange(SweetqError):
    token = "vertex_out_of_range"


class CapExceeded(SweetqError):
    token = "cap_exceeded"


class CorruptFile(SweetqError):
    token = "corrupt_file"


class HeaderMismatch(SweetqError):
    token = "header_mismatch"


class IoFailure(SweetqError):
    token = "io_failure"


class ConfigError(SweetqError):
    token = "config_error"


class Unconverged(SweetqError):
    """Raised when no batch produced a successful rollout; ``result`` holds the best attempt."""

    token = "unconverged"

    def __init__(self, msg: str, result=None):
        super().__init__(msg)
        self.result = result
