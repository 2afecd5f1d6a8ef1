"""
Exception hierarchy for holx.

Every failure the toolkit raises derives from HolxError so the CLI can map
it to an exit status in one place. Model constraint problems are NOT
exceptions: they are reported as Violation records by validate().
"""

from typing import List, Optional, Sequence


class HolxError(Exception):
    """Base class for all holx errors."""


# ============================================================================
# HOLON CORE
# ============================================================================

class NotFound(HolxError):
    """An id does not resolve in the model."""

    def __init__(self, kind: str, ident: str):
        super().__init__(f"{kind} '{ident}' not found")
        self.kind = kind
        self.ident = ident


class UnknownHolon(NotFound):
    def __init__(self, ident: str):
        super().__init__("holon", ident)


class UnknownProcess(NotFound):
    def __init__(self, ident: str):
        super().__init__("process", ident)


class UnknownItem(NotFound):
    def __init__(self, token: str):
        super().__init__("item", token)


class UnknownMetaModel(NotFound):
    def __init__(self, ident: str):
        super().__init__("meta-model", ident)


class DuplicateId(HolxError):
    def __init__(self, kind: str, ident: str):
        super().__init__(f"duplicate {kind} id '{ident}'")
        self.kind = kind
        self.ident = ident


class InvalidState(HolxError):
    pass


class EmptyConstituentList(HolxError):
    def __init__(self):
        super().__init__("assemble needs at least one constituent")


class EmptyPartList(HolxError):
    def __init__(self):
        super().__init__("disassemble needs at least one part descriptor")


class RetiredConstituent(HolxError):
    def __init__(self, holon_id: str):
        super().__init__(f"holon '{holon_id}' is retired")
        self.holon_id = holon_id


class TimeRegression(HolxError):
    def __init__(self, holon_id: str, last_at, new_at):
        super().__init__(
            f"state at {new_at.isoformat()} precedes last state of '{holon_id}' at {last_at.isoformat()}"
        )
        self.holon_id = holon_id


class InvalidModel(HolxError):
    """Raised by operations whose precondition is a valid model."""

    def __init__(self, violations: Sequence):
        self.violations = list(violations)
        head = "; ".join(f"{v.code} {v.subject}" for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"model has {len(self.violations)} violation(s): {head}{more}")


# ============================================================================
# MODEL IO
# ============================================================================

class XmlSyntax(HolxError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"XML syntax error at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SchemaViolation(HolxError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ModelReferenceError(HolxError):
    """Dangling id in a parsed document."""

    def __init__(self, violations: Sequence):
        self.violations = list(violations)
        subjects = ", ".join(v.subject for v in self.violations[:5])
        super().__init__(f"dangling reference(s): {subjects}")


# ============================================================================
# INTEROP ANALYSIS
# ============================================================================

class InvalidHorizon(HolxError):
    def __init__(self, horizon):
        super().__init__(f"horizon must be an integer >= 1, got {horizon!r}")
        self.horizon = horizon


class OutOfHorizon(HolxError):
    def __init__(self, node, horizon: int):
        super().__init__(f"{node} lies outside horizon K={horizon}")
        self.node = node
        self.horizon = horizon


# ============================================================================
# EXECUTION
# ============================================================================

class CapabilityMissing(HolxError):
    def __init__(self, process_id: str, capability: str):
        super().__init__(f"process '{process_id}' needs capability '{capability}'")
        self.process_id = process_id
        self.capability = capability


class ConsumedItemAbsent(HolxError):
    def __init__(self, process_id: str, item_token: str):
        super().__init__(f"process '{process_id}' consumes '{item_token}' but no input holon carries it")
        self.process_id = process_id
        self.item = item_token


class DomainFault(HolxError):
    """Injected or simulated failure inside a run; the store is rolled back."""

    def __init__(self, process_id: str, point: Optional[str], reason: str):
        where = f" at {point}" if point else ""
        super().__init__(f"run of '{process_id}' failed{where}: {reason}; rolled back")
        self.process_id = process_id
        self.point = point
        self.reason = reason


# ============================================================================
# TRANSFORM ENGINE
# ============================================================================

class MappingSpecError(HolxError):
    pass


class UnknownSourceElement(MappingSpecError):
    def __init__(self, rule_id: str, kind: str):
        super().__init__(f"rule '{rule_id}' selects unknown source element '{kind}'")
        self.rule_id = rule_id
        self.kind = kind


class UnknownTargetElement(MappingSpecError):
    def __init__(self, rule_id: str, element: str):
        super().__init__(f"rule '{rule_id}' emits unknown target element '{element}'")
        self.rule_id = rule_id
        self.element = element


class DuplicateRuleId(MappingSpecError):
    def __init__(self, rule_id: str):
        super().__init__(f"duplicate rule id '{rule_id}'")
        self.rule_id = rule_id


class SourceMismatch(HolxError):
    def __init__(self, expected: str, actual: str):
        super().__init__(f"mapping reads '{expected}' documents, got '{actual}'")


class SchemaViolationInOutput(HolxError):
    def __init__(self, issues: List[str]):
        self.issues = list(issues)
        super().__init__("transformation produced an invalid document: " + "; ".join(self.issues[:3]))
