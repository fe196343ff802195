"""Exception types raised across the package."""


class VizSceneError(Exception):
    """Base class for all errors raised by this package."""


class DataError(VizSceneError):
    """Bad input data: malformed CSV, dangling network links, unknown attributes."""


class SceneError(VizSceneError):
    """Invalid scene structure or an operation applied to an unsuitable element."""


class ChannelError(SceneError):
    """A channel name is invalid for a mark type, or is owned by an encoding."""


class EncodingError(VizSceneError):
    """Encoding or scale misuse: duplicate bindings, kind mismatches, bad patches."""


class LayoutError(VizSceneError):
    """Layout misuse: bad parameters or conflicts with position encodings."""


class ConstraintError(VizSceneError):
    """Constraint conflicts, cycles, or unpaired affix members."""


class SceneFormatError(VizSceneError):
    """A scene JSON document failed validation.

    ``path`` points at the offending location, e.g. ``elements[3].members[1]``.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class PipelineError(VizSceneError):
    """A pipeline step failed; carries the step index for CLI reporting."""

    def __init__(self, step_index, message):
        self.step_index = step_index
        super().__init__(f"step {step_index}: {message}")
