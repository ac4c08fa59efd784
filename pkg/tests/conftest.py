import os
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from itlbench.formula import BOT, And, Atom, Implies, Next, Or, Release, Until  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=150,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def formulas(atoms=("p", "q"), temporal=True, max_leaves=12):
    leaves = st.one_of(st.sampled_from([Atom(a) for a in atoms]), st.just(BOT))

    def extend(children):
        binary = [And, Or, Implies]
        if temporal:
            binary += [Until, Release]
        opts = [st.builds(op, children, children) for op in binary]
        if temporal:
            opts.append(st.builds(Next, children))
        return st.one_of(*opts)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def models(draw, logic="ITLe", max_worlds=4, atoms=("p", "q")):
    """A model of ``logic`` drawn from the enumerated frames with a random monotone valuation."""
    from itlbench.kripke import FiniteModel, frames, parse_logic, upsets

    fr = draw(st.sampled_from(frames(parse_logic(logic), max_worlds)))
    ups = upsets(fr.up)
    masks = [draw(st.sampled_from(ups)) for _ in atoms]
    return FiniteModel.from_frame(fr, list(atoms), masks)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
    for note in mod.NOTES:
        terminalreporter.write_line(note)
