"""Move counts for both Tower of Hanoi strategy variants.

The variant with the move inside the first conditional performs
2^(n-1) - 1 moves (no move at all for a single disc); lifting the move
out of the conditional gives the classic 2^n - 1.
"""

from roboto.catalog import builtin_corpus_text
from roboto.engine import Ack, Answer, Decision, run_scripted
from roboto.parser import parse_document
from roboto.values import Text


def script(level: int, corrected: bool) -> list:
    out = [Answer(Text(str(level - 1))), Decision(level > 1)]
    if level > 1:
        out.extend(script(level - 1, corrected))
    if corrected or level > 1:
        out.append(Ack())
    out.append(Decision(level > 1))
    if level > 1:
        out.extend(script(level - 1, corrected))
    return out


def args(level: int) -> dict:
    return {
        "level": Text(str(level)),
        "source": Text("A"),
        "target": Text("C"),
        "auxiliary": Text("B"),
    }


def main() -> None:
    as_printed = parse_document(builtin_corpus_text("towerOfHanoi.roboto"))
    corrected_text = builtin_corpus_text("towerOfHanoiCorrected.roboto")
    corrected = parse_document(corrected_text)

    print(f"{'level':>5} {'moves (as printed)':>20} {'moves (corrected)':>20} {'max depth':>10}")
    for level in range(1, 5):
        a = run_scripted(as_printed, "towerOfHanoi", args(level), script(level, False))
        c = run_scripted(corrected, "towerOfHanoiCorrected", args(level), script(level, True))
        moves_a = sum(1 for e in a.entries if e.kind == "action" and e.text.startswith("Move"))
        moves_c = sum(1 for e in c.entries if e.kind == "action" and e.text.startswith("Move"))
        assert moves_a == 2 ** (level - 1) - 1
        assert moves_c == 2 ** level - 1
        assert a.max_depth() == c.max_depth() == level
        print(f"{level:>5} {moves_a:>20} {moves_c:>20} {a.max_depth():>10}")


if __name__ == "__main__":
    main()
