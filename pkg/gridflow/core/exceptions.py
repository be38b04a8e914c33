from typing import Optional, Tuple

EXIT_FAILURE = 1
EXIT_USAGE = 2


class GridflowError(Exception):
    exit_code = EXIT_FAILURE

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(GridflowError):
    exit_code = EXIT_USAGE


# --- Manifest ---

class ManifestError(GridflowError):
    pass


class EmptyManifest(ManifestError):
    def __init__(self, path: str = ""):
        super().__init__(f"Manifest is empty{': ' + path if path else ''}")


class DuplicateId(ManifestError):
    def __init__(self, record_id: str):
        super().__init__(f"Duplicate manifest id: {record_id}")
        self.record_id = record_id


class ManifestParseError(ManifestError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"Malformed manifest line {line}: {reason}")
        self.line = line


# --- Generation ---

class InvalidLevel(GridflowError):
    exit_code = EXIT_USAGE

    def __init__(self, kind: str, level):
        super().__init__(f"Level {level!r} is not admissible for task {kind}")
        self.kind = kind
        self.level = level


class GenerationStuck(GridflowError):
    def __init__(self, kind: str, seed: int, attempts: int):
        super().__init__(f"{kind} generation for seed {seed} gave up after {attempts} attempts")
        self.seed = seed
        self.attempts = attempts


# --- Oracle ---

class OracleInputError(GridflowError):
    exit_code = EXIT_USAGE


class KindMismatch(GridflowError):
    exit_code = EXIT_USAGE

    def __init__(self, expected: str, actual: str):
        super().__init__(f"Expected a {expected} solution, got {actual}")


class Unsatisfiable(GridflowError):
    def __init__(self, detail: str = "Sudoku givens admit no completion"):
        super().__init__(detail)


# --- Render ---

class RenderRefused(GridflowError):
    pass


class DecodeError(GridflowError):
    pass


# --- Parse ---

class ParseError(GridflowError):
    """Base for every way an image can fail to yield a symbolic solution."""


class NoPath(ParseError):
    """Also raised by the path oracle when the goal is unreachable."""


class AmbiguousPath(ParseError):
    pass


class OffGrid(ParseError):
    def __init__(self, expected: Tuple[int, int], actual: Tuple[int, int]):
        super().__init__(f"Image is {actual[0]}x{actual[1]}, instance renders at {expected[0]}x{expected[1]}")


class NotACycle(ParseError):
    pass


class DegreeViolation(ParseError):
    def __init__(self, city: int, degree: int):
        super().__init__(f"City {city} has degree {degree}, expected 2")
        self.city = city
        self.degree = degree


class GivenMismatch(ParseError):
    def __init__(self, cell: int, expected: int, found: int):
        super().__init__(f"Given at cell {cell} reads {found}, expected {expected}")
        self.cell = cell


class IllegibleCell(ParseError):
    def __init__(self, cell: int, distance: Optional[int] = None):
        reason = "no ink" if distance is None else f"closest glyph is {distance} bits away"
        super().__init__(f"Cell {cell} is illegible ({reason})")
        self.cell = cell


# --- Flow / sampling ---

class ShapeMismatch(GridflowError):
    pass


class CheckpointError(GridflowError):
    pass


class TrainingDiverged(GridflowError):
    def __init__(self, step: int, loss: float, diagnostics: dict):
        super().__init__(f"Non-finite loss {loss} at step {step}: {diagnostics}")
        self.step = step
        self.diagnostics = diagnostics


class SampleDiverged(GridflowError):
    def __init__(self, step: int):
        super().__init__(f"Sampler state became non-finite at step {step}")
        self.step = step
