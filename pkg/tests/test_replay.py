from __future__ import annotations

from situ_talker.repl import format_replay, replay_script


def test_library_script_replays_clean(session_store) -> None:
    result = replay_script(session_store, "scripts/library.script")
    assert result.ok, format_replay(result)
    assert result.turns == 9


def test_restaurant_script_replays_clean(session_store) -> None:
    result = replay_script(session_store, "scripts/restaurant.script")
    assert result.ok, format_replay(result)


def test_replay_reports_mismatches(tmp_path, session_store) -> None:
    script = tmp_path / "wrong.script"
    script.write_text(
        "world restaurant\n"
        "expect-spoken This text is wrong on purpose\n"
        "expect-display Maxim's de Paris\n"
    )
    result = replay_script(session_store, script)
    assert not result.ok
    assert len(result.mismatches) == 1
    report = format_replay(result)
    assert "FAIL" in report and "wrong on purpose" in report


def test_replay_checks_full_item_list(tmp_path, session_store) -> None:
    script = tmp_path / "short.script"
    script.write_text(
        "world restaurant\n"
        "expect-display Maxim's de Paris\n"
        "expect-item 1. Menu and Price\n"
    )
    result = replay_script(session_store, script)
    # one item asserted but three displayed: the item-count check fails
    assert not result.ok
    assert any(c.kind == "item-count" for c in result.mismatches)
