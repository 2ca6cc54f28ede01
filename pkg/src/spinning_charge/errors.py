"""Exception types raised by the simulator and the verification passes."""


class NonSkewInput(ValueError):
    """A matrix expected to lie in so(3) has a significant symmetric part."""


class QuadratureNotConverged(RuntimeError):
    pass


class ProfileTooWide(ValueError):
    """The charge profile does not fit in the periodic box (needs L >= 10 sigma)."""


class NonZeroMean(ValueError):
    """Periodic Poisson problem without a zero-mean right-hand side."""


class NonSolenoidalB(ValueError):
    pass


class NumericalBlowup(FloatingPointError):
    pass


class ConfigError(ValueError):
    """Bad or unknown configuration key/value."""
