import json
from dataclasses import replace

import pytest

from helpers import BuildOnceAgent, advance, bare_state
from unitforge.agents import IdleAgent, RandomAgent, RushAgent
from unitforge.engine import (
    ATTACK,
    HARVEST,
    IDLE,
    IDLE_CMD,
    MOVE,
    PRODUCE,
    Ability,
    Cause,
    Command,
    ConfigError,
    Effect,
    GameConfig,
    GameOver,
    Placement,
    UnitTypeDef,
    legal_actions,
    new_game,
    run_game,
    step,
)
from unitforge.evaluator import game_config_for
from unitforge.unitspace import GeneratedUnit


def with_ability(config, name, cause, effect):
    t = replace(config.unit_types[name], ability=Ability(Cause(cause), Effect(effect)))
    types = dict(config.unit_types)
    types[name] = t
    return replace(config, unit_types=types)


# -- setup ---------------------------------------------------------------------

def test_new_game_has_three_units_per_player(config):
    s = new_game(config, 0)
    assert s.tick == 0
    assert len(s.units) == 6
    assert s.unit_count(0) == s.unit_count(1) == 3
    assert s.resources == [config.start_resources] * 2


def test_layout_ignores_seed(config):
    a, b = new_game(config, 0), new_game(config, 12345)
    assert a.grid == b.grid
    assert a.nodes == b.nodes
    assert [(u.id, u.utype.name, u.owner, u.position) for u in a.units.values()] == \
           [(u.id, u.utype.name, u.owner, u.position) for u in b.units.values()]


def test_layout_is_point_symmetric(config):
    s = new_game(config, 0)
    w, h = config.width, config.height
    mine = {(u.utype.name, u.x, u.y) for u in s.units.values() if u.owner == 0}
    theirs = {(u.utype.name, w - 1 - u.x, h - 1 - u.y) for u in s.units.values() if u.owner == 1}
    assert mine == theirs
    nodes = {s.coords[c] for c in s.nodes}
    assert nodes == {(w - 1 - x, h - 1 - y) for x, y in nodes}


def test_overlapping_placements_rejected(config):
    base = next(p for p in config.placements if p.unit_type == "Base" and p.owner == 0)
    bad = replace(config, placements=config.placements + (Placement("Barracks", 0, base.x, base.y),))
    with pytest.raises(ConfigError):
        new_game(bad, 0)


def test_config_round_trips_through_dict(config):
    assert GameConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config


@pytest.mark.parametrize("field,value", [("max_hp", 0), ("cost", 0), ("damage", -1), ("move_time", 0)])
def test_unit_type_rejects_out_of_range_stats(field, value):
    kwargs = dict(name="X", cost=1, max_hp=1, damage=1, attack_range=1, move_time=1, attack_time=1, produce_time=1)
    kwargs[field] = value
    with pytest.raises(ConfigError):
        UnitTypeDef(**kwargs)


# -- legal actions -------------------------------------------------------------

def test_worker_next_to_node_may_harvest(config):
    s = bare_state(config, [("Worker", 0, 1, 0), ("Base", 1, 6, 6)], nodes=[(0, 0, 20)])
    cmds = s.commands_for(s.units[0])
    assert Command(HARVEST, s.cell(0, 0)) in cmds


def test_no_production_without_resources(config):
    s = bare_state(config, [("Barracks", 0, 3, 3), ("Base", 1, 6, 6)], resources=(0, 0))
    assert all(c.kind != PRODUCE for c in s.commands_for(s.units[0]))
    s.resources = [config.unit_types["Light"].cost, 0]
    assert any(c.kind == PRODUCE for c in s.commands_for(s.units[0]))


def test_surrounded_unit_can_only_idle(config):
    s = bare_state(config, [
        ("Light", 0, 3, 3),
        ("Barracks", 0, 3, 2), ("Barracks", 0, 3, 4), ("Barracks", 0, 2, 3), ("Barracks", 0, 4, 3),
        ("Base", 1, 7, 7),
    ], resources=(0, 0))
    assert legal_actions(s, 0)[0] == [IDLE_CMD]


def test_legal_actions_on_terminal_state_is_an_error(config):
    s = bare_state(config, [("Base", 1, 7, 7)])
    s._check_terminal()
    with pytest.raises(GameOver):
        legal_actions(s, 0)


def test_access_table_limits_production(config):
    s = bare_state(config, [("Barracks", 0, 3, 3), ("Base", 1, 7, 7)])
    s.access = [frozenset({"Heavy"}), None]
    kinds = {c.unit_type for c in s.commands_for(s.units[0]) if c.kind == PRODUCE}
    assert kinds == {"Heavy"}
    _, rejected = step(s, {0: Command(PRODUCE, s.cell(3, 2), "Light")}, {})
    assert len(rejected) == 1


# -- stepping ------------------------------------------------------------------

def test_step_advances_one_tick_and_is_pure(config):
    s = new_game(config, 0, record=True)
    nxt, rejected = step(s, {}, {})
    assert rejected == []
    assert (s.tick, nxt.tick) == (0, 1)


def test_illegal_command_rejected_rest_applies(config):
    s = bare_state(config, [("Light", 0, 3, 3), ("Light", 0, 5, 5), ("Base", 1, 7, 7)])
    nxt, rejected = step(s, {0: Command(MOVE, s.cell(3, 4)), 1: Command(MOVE, s.cell(0, 0))}, {})
    assert [r.unit_id for r in rejected] == [1]
    assert nxt.units[0].action == Command(MOVE, s.cell(3, 4))
    assert nxt.units[1].action is None


def test_busy_unit_command_rejected(config):
    s = bare_state(config, [("Light", 0, 3, 3), ("Base", 1, 7, 7)])
    s.apply({0: Command(MOVE, s.cell(3, 4))}, {})
    rejected = s.apply({0: Command(MOVE, s.cell(2, 3))}, {})
    assert rejected and rejected[0].reason == "unit is busy"


def test_moves_are_durative(config):
    s = bare_state(config, [("Light", 0, 3, 3), ("Base", 1, 7, 7)])
    mt = config.unit_types["Light"].move_time
    s.apply({0: Command(MOVE, s.cell(3, 4))}, {})
    advance(s, mt - 2)
    assert s.units[0].position == (3, 3)
    advance(s, 1)
    assert s.tick == mt
    assert s.units[0].position == (3, 4)


def test_move_conflict_goes_to_lower_id(config):
    # two equally fast units aim at the same cell and finish on the same tick
    s = bare_state(config, [("Light", 1, 3, 3), ("Light", 0, 5, 3)])
    target = s.cell(4, 3)
    s.apply({1: Command(MOVE, target)}, {0: Command(MOVE, target)})
    advance(s, config.unit_types["Light"].move_time)
    assert s.units[0].position == (4, 3)
    assert s.units[1].position == (5, 3)
    assert any(e[1] == "cancel" and e[2] == (1,) for e in s.log)


def _hit(config, victim_hp, cause=2, effect=3):
    cfg = with_ability(config, "Heavy", cause, effect)
    s = bare_state(cfg, [("Heavy", 0, 3, 3), ("Worker", 1, 4, 3), ("Base", 0, 0, 7), ("Base", 1, 7, 0)])
    s.units[0].hp = victim_hp
    s.apply({}, {1: Command(ATTACK, 0)})
    advance(s, cfg.unit_types["Worker"].attack_time)
    return s


def test_on_damage_heal_applies_after_nonlethal_damage(config):
    s = _hit(config, victim_hp=2)  # 2 - 1 + 3, capped at max hp 4
    assert s.units[0].hp == min(config.unit_types["Heavy"].max_hp, 2 - 1 + 3)


def test_lethal_damage_suppresses_on_damage_heal(config):
    s = _hit(config, victim_hp=1)
    assert 0 not in s.units
    assert not any(e[1] == "ability" for e in s.log)


def test_on_death_counter_attack_hits_killer(config):
    cfg = with_ability(config, "Worker", 1, 2)
    s = bare_state(cfg, [("Worker", 0, 3, 3), ("Light", 1, 4, 3), ("Base", 0, 0, 7), ("Base", 1, 7, 0)])
    s.apply({}, {1: Command(ATTACK, 0)})
    advance(s, cfg.unit_types["Light"].attack_time)
    assert 0 not in s.units
    assert s.units[1].hp == cfg.unit_types["Light"].max_hp - cfg.unit_types["Worker"].damage


def test_on_death_grant_is_logged_and_conserved(config):
    cfg = with_ability(config, "Light", 1, 1)
    s = bare_state(cfg, [("Light", 0, 3, 3), ("Heavy", 1, 4, 3), ("Base", 0, 0, 7), ("Base", 1, 7, 0)])
    s.units[0].hp = 1
    s.apply({}, {1: Command(ATTACK, 0)})
    advance(s, 5)
    assert s.granted[0] == cfg.unit_types["Light"].cost
    assert any(e[1] == "grant" for e in s.log)
    assert s.conservation_gap() == 0


def test_third_attack_speed_boost(config):
    cfg = with_ability(config, "Heavy", 4, 4)
    s = bare_state(cfg, [("Heavy", 0, 3, 3), ("Base", 1, 4, 3), ("Base", 0, 0, 7)])
    s.units[1].hp = 100
    base_time = cfg.unit_types["Heavy"].attack_time
    for _ in range(3):
        s.apply({0: Command(ATTACK, 1)}, {})
        advance(s, s.units[0].done - s.tick)
    assert s.units[0].boost
    assert s.units[0].attack_time == max(1, base_time // 2)
    assert s.units[0].attacks == 0


def test_ability_damage_does_not_recurse(config):
    # both units counter on damage taken; the counter-hit must not trigger another counter
    cfg = with_ability(config, "Heavy", 2, 2)
    s = bare_state(cfg, [("Heavy", 0, 3, 3), ("Heavy", 1, 4, 3), ("Base", 0, 0, 7), ("Base", 1, 7, 0)])
    for u in s.units.values():
        u.hp = 100
    s.apply({0: Command(ATTACK, 1)}, {})
    advance(s, cfg.unit_types["Heavy"].attack_time)
    dmg = cfg.unit_types["Heavy"].damage
    assert s.units[1].hp == 100 - dmg
    assert s.units[0].hp == 100 - dmg
    assert sum(1 for e in s.log if e[1] == "ability_damage") == 1


def test_draw_at_max_ticks(config):
    cfg = replace(config, max_ticks=50)
    s = new_game(cfg, 0, record=True)
    s.tick = cfg.max_ticks - 1
    s.apply({}, {})
    assert s.terminal and s.winner is None and s.tick == cfg.max_ticks


def test_elimination_wins(config):
    s = bare_state(config, [("Heavy", 0, 3, 3), ("Worker", 1, 4, 3)])
    s.apply({0: Command(ATTACK, 1)}, {})
    advance(s, config.unit_types["Heavy"].attack_time)
    assert s.terminal and s.winner == 0


def test_idle_is_durative(config):
    s = bare_state(config, [("Light", 0, 3, 3), ("Base", 1, 7, 7)])
    s.apply({0: IDLE_CMD}, {})
    assert s.units[0].action.kind == IDLE
    advance(s, config.idle_time - 1)
    assert s.units[0].action is None


# -- full games ----------------------------------------------------------------

def test_rush_beats_idle(config):
    r = run_game(config, IdleAgent(), RushAgent(), 0)
    assert r.winner == 1
    assert r.end_tick < config.max_ticks


def test_identical_runs_give_identical_logs(config):
    runs = [run_game(config, RandomAgent(3), RandomAgent(4), 0) for _ in range(2)]
    assert list(runs[0].event_lines()) == list(runs[1].event_lines())
    assert runs[0].event_hash() == runs[1].event_hash()


def test_fast_forward_does_not_change_the_game(config):
    a = run_game(config, RandomAgent(1), RushAgent(), 0, fast_forward=True)
    b = run_game(config, RandomAgent(1), RushAgent(), 0, fast_forward=False)
    assert a.event_hash() == b.event_hash()


def test_unproduced_type_has_zero_stats(config):
    cfg = replace(config, max_ticks=300).with_unit_type(
        UnitTypeDef("NewUnit", 2, 2, 2, 2, 8, 5, 100, ability=Ability(Cause(1), Effect(1))))
    r = run_game(cfg, IdleAgent(), IdleAgent(), 0)
    st = r.stats("NewUnit")
    assert st.times_produced == 0 and st.alive_interval_union == 0


def test_alive_union_matches_event_log(config):
    from unitforge.evaluator import EvalConfig

    unit = GeneratedUnit(2, 3, 1, 1, 9, 5, 3, 3)
    cfg = replace(config, max_ticks=700)
    game = game_config_for(unit, EvalConfig(game=cfg))
    r = run_game(game, BuildOnceAgent("NewUnit"), IdleAgent(), 0)
    born = [e[0] for e in r.events if e[1] == "produce" and e[3]["type"] == "NewUnit"]
    assert len(born) == 1
    st = r.stats("NewUnit")
    assert st.times_produced == 1 and st.produced_by == [1, 0]
    assert st.alive_interval_union == r.end_tick - born[0]
    assert st.alive_interval_union <= r.end_tick


def test_invariants_hold_every_tick(config):
    seen = []

    def check(s):
        assert s.conservation_gap() == 0
        cells = [u.cell for u in s.units.values()]
        assert len(cells) == len(set(cells))
        for u in s.units.values():
            assert 0 <= u.hp <= u.utype.max_hp
            assert s.grid[u.cell] == u.id
        assert s.tick <= s.config.max_ticks
        seen.append(s.tick)

    run_game(config, RandomAgent(5), RushAgent(), 0, fast_forward=False, on_tick=check)
    assert seen == list(range(1, len(seen) + 1))


def test_decision_timeout_idles_and_logs(config):
    class Slow(RandomAgent):
        def choose_action(self, state, player):
            import time
            time.sleep(0.002)
            return super().choose_action(state, player)

    cfg = replace(config, max_ticks=60)
    r = run_game(cfg, Slow(0), IdleAgent(), 0, decision_timeout=0.0)
    assert r.timeouts > 0
    assert any(e[1] == "timeout" for e in r.events)
    assert not any(e[1] == "order" and e[2][0] in (0, 2, 4) for e in r.events)
