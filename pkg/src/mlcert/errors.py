"""Exception hierarchy.

Every error raised on bad input derives from :class:`MLCertError`; the CLI maps
those to exit status 3 and anything else to 4.
"""


class MLCertError(Exception):
    """Base class for all engine errors caused by inputs."""


# classification / registry
class ClassificationError(MLCertError, ValueError):
    pass


class UnknownCriticality(ClassificationError):
    pass


class UnknownAutonomy(ClassificationError):
    pass


class UnknownComplexity(ClassificationError):
    pass


class RegistryError(MLCertError):
    pass


class NoMatchingProfile(RegistryError):
    pass


class InvalidWeights(RegistryError):
    pass


# evidence
class EvidenceError(MLCertError):
    pass


class ParseError(EvidenceError):
    def __init__(self, message, *, path=None, line=None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(path)
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class SchemaViolation(EvidenceError):
    def __init__(self, invariant, location=None, detail=""):
        self.invariant = invariant
        self.location = location
        msg = f"{invariant} violated"
        if location is not None:
            msg += f" at {location}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ChecksumMismatch(EvidenceError):
    pass


# metrics / checks
class NoGroundTruth(MLCertError):
    pass


class CheckError(MLCertError):
    pass


class BinMismatch(CheckError):
    pass


class EmptyDataset(CheckError):
    pass


class NoSharedFeatures(CheckError):
    pass


class NoPerturbedRuns(CheckError):
    pass


class ZeroBaseline(CheckError):
    pass


class EmptySamples(CheckError):
    pass


class NothingAssessable(CheckError):
    pass


# scoring
class ScoringError(MLCertError):
    pass


class NoInputs(ScoringError):
    pass


class WeightMismatch(ScoringError):
    pass


class BadWeightSum(ScoringError):
    pass


class MissingProcess(ScoringError):
    pass


class OutOfRange(ScoringError, ValueError):
    pass


class NoThresholds(ScoringError):
    pass


class UnscoredActivities(ScoringError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("no score inputs for activities: " + ", ".join(self.missing))


# monitoring
class MonitorError(MLCertError):
    pass


class MissingBaseline(MonitorError):
    pass


class UnorderedWindows(MonitorError):
    pass


# configuration management
class LedgerError(MLCertError):
    pass


class DuplicateArtifactId(LedgerError):
    pass


class UnknownArtifact(LedgerError):
    pass


class NoChange(LedgerError):
    pass


class ConfigError(MLCertError):
    pass
