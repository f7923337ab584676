class FalsificationError(RuntimeError):
    """An empirically checkable statement failed on concrete data.

    Raised when a measured quantity contradicts its closed-form prediction
    (cycle censuses, fixed-point counts, bijection fiber sizes, ...).  These
    are build-stopping defects, not user errors.
    """
