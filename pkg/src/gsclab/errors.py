"""Exception types shared across the package."""


class GsclabError(Exception):
    """Base class for all package errors."""


class OrderCapExceeded(GsclabError):
    """A full multiplication table was requested for a group above the cap."""


class InvalidGenerators(GsclabError):
    """A claimed generator is not a bijection, or generators are inconsistent."""


class NotAKnitProduct(GsclabError):
    """H and K fail one of the three knit-product conditions."""

    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"{condition}: {message}")


class NotAHomomorphism(GsclabError):
    """Generator images do not extend to a group homomorphism."""


class NotBijective(GsclabError):
    """A candidate automorphism is not a bijection."""


class NumericalDegeneracy(GsclabError):
    """Eigenvector separation failed in the character-table solver."""


class CapExceeded(GsclabError):
    """A size cap (state support, irrep order, enumeration) was exceeded."""


class TooSmall(GsclabError):
    """Lattice dimensions below the minimum."""


class NotFluxFree(GsclabError):
    """An operation requiring a flux-free configuration saw a flux."""


class FluxPresentWarning(GsclabError):
    """Holonomy is row-dependent because the configuration carries flux."""


class AlphabetMismatch(GsclabError):
    """An edge operation used an element outside the edge's group."""


class ZeroWeight(GsclabError):
    """A projection annihilated the state."""


class PostselectionFailed(GsclabError):
    """A postselect_trivial run saw a nontrivial outcome; carries the record."""

    def __init__(self, message: str, record=None):
        self.record = record
        super().__init__(message)


class MaxAttemptsExceeded(GsclabError):
    """Repeat-until-success loop ran out of attempts; carries the report."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class BoundaryBlocked(GsclabError):
    """A flux move attempted to exit through a rough boundary."""


class UnrepairableFluxes(GsclabError):
    """Readout decoding could not remove the fluxes."""


class UnsupportedBasis(GsclabError):
    """Logical frame measurement requested an unavailable basis."""
