"""Deliberately naive reference model of the strip's switching logic.

Written independently of the package, straight from the product
description: numbered buttons toggle their outlet, the master button
switches everything off and, pressed again, switches back on whatever was
on before. Used as the ground-truth oracle in exhaustive comparisons.

Actions are plain strings: "T<i>" toggles outlet i, "M" is the master.
State is a plain dict; no shared code with the package.
"""


def fresh(n, on=None):
    if on is None:
        on = [False] * n
    return {"on": list(on), "shut": False, "remember": list(on)}


def poke(state, action):
    state = {
        "on": list(state["on"]),
        "shut": state["shut"],
        "remember": list(state["remember"]),
    }
    if action == "M":
        if state["shut"]:
            state["on"] = list(state["remember"])
            state["shut"] = False
            state["remember"] = list(state["on"])
        else:
            state["remember"] = list(state["on"])
            state["on"] = [False] * len(state["on"])
            state["shut"] = True
        return state
    index = int(action[1:])
    if state["shut"]:
        # Waking the strip first: the remembered pattern comes back,
        # then the requested outlet flips.
        state["on"] = list(state["remember"])
        state["shut"] = False
    state["on"][index] = not state["on"][index]
    state["remember"] = list(state["on"])
    return state


def run(n, actions, on=None):
    state = fresh(n, on)
    for action in actions:
        state = poke(state, action)
    return state
