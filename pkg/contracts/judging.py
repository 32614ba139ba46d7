"""Misbehavior-judging methods and the penalty function they share."""


def capped_penalty(base, interval, count, unit_seconds, cap):
    """
    Penalty in seconds, ``base ** (count // interval) * unit_seconds``, never above ``cap``.

    Returns:
        tuple: (penalty_seconds, capped) where capped tells whether the
        uncapped value would have exceeded the cap
    """
    # pylint: disable=R0913
    exponent = count // interval
    value = unit_seconds
    # multiply up one step at a time and stop at the cap
    for _ in range(exponent):
        value *= base
        if value > cap:
            return cap, True
    if value > cap:
        return cap, True
    return value, False


class JudgingMethod:
    """
    Decides whether a reported potential misbehavior counts.

    Subclasses can look at the subject's history; the judge contract appends
    the record only when :meth:`accepts` says yes.
    """
    name = ""

    def accepts(self, history, misbehavior):
        """Return True when the report is judged to be a misbehavior."""
        raise NotImplementedError


class AcceptAllJudging(JudgingMethod):
    """Treat every report coming from an ACC as misbehavior."""
    # pylint: disable=R0903
    name = "accept-all"

    def accepts(self, history, misbehavior):
        return True


JUDGING_METHODS = {
    AcceptAllJudging.name: AcceptAllJudging(),
}
