"""
Exception hierarchy shared by every PotLab app.

Errors follow the shape of Django REST framework's ``APIException``: each
class carries a ``default_detail`` message and a ``default_code`` string, and
an instance exposes ``detail`` and ``code``. Management commands map any
``PotlabError`` to exit status 2 and print the code, so codes are part of the
command-line contract.

Non-convergence is never raised. Quadrature and gap estimators return results
with ``converged=False`` and the flag travels into ``VerificationReport.flags``.
"""


class PotlabError(Exception):
    default_detail = 'PotLab error.'
    default_code = 'error'

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def __str__(self):
        return f'[{self.code}] {self.detail}'


class ParameterError(PotlabError, ValueError):
    default_detail = 'Invalid parameter.'
    default_code = 'parameter'


class UnsupportedDimensionError(PotlabError):
    default_detail = 'Meshing is implemented for n in {2, 3} only.'
    default_code = 'unsupported-dimension'


class OrientationError(PotlabError):
    default_detail = 'Mesh orientation is inconsistent (negative enclosed volume).'
    default_code = 'orientation'


class SingularityError(PotlabError):
    default_detail = 'Function evaluated at a point of its singular set.'
    default_code = 'singularity'


class InvalidPoleError(PotlabError):
    default_detail = 'Pole is not admissible.'
    default_code = 'invalid-pole'


class NearSingularityError(PotlabError):
    default_detail = 'Evaluation point is too close to the singular set.'
    default_code = 'near-singularity'


class DomainError(PotlabError):
    default_detail = 'Point is not where the operation requires it to be.'
    default_code = 'domain'


class NonFiniteValueError(PotlabError):
    default_detail = 'Integrand is not finite on the mesh.'
    default_code = 'non-finite'

    def __init__(self, detail=None, code=None, facet=None):
        self.facet = facet
        if detail is None and facet is not None:
            detail = f'Integrand is not finite at facet {facet}.'
        super().__init__(detail, code)


class PreconditionError(PotlabError):
    default_detail = 'Operation precondition violated.'
    default_code = 'precondition'
