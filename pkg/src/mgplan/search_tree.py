"""Incremental search tree: OPEN/CLOSED bookkeeping, re-rooting, conservative update.

The tree outlives individual search episodes.  Nodes carry an iteration
stamp naming the episode whose goal their h-value reflects; stale stamps are
refreshed lazily by the search engine.  OPEN is a lazy-deletion binary heap:
every push snapshots (f, -g, seq) and bumps the node's version, entries
whose version no longer matches are skipped at pop time.
"""

from __future__ import annotations

import heapq
from typing import Callable, Iterator

from .strips import Goal, GroundAction, State, goal_satisfied

OPEN = 0
CLOSED = 1


class EmptyOpen(Exception):
    """select_min on an exhausted frontier."""


class StateNotInTree(Exception):
    """Re-rooting was asked for a state the tree has never stored."""


class SearchNode:
    __slots__ = ("state", "g", "h", "parent", "incoming", "iteration", "status", "seq", "version")

    def __init__(self, state: State, g: int, h: float, parent, incoming, iteration: int, seq: int):
        self.state = state
        self.g = g
        self.h = h
        self.parent: SearchNode | None = parent
        self.incoming: GroundAction | None = incoming
        self.iteration = iteration
        self.status = OPEN
        self.seq = seq  # creation order, used for deterministic scans
        self.version = 0

    def __repr__(self):
        tag = "open" if self.status == OPEN else "closed"
        return f"<node g={self.g} h={self.h} it={self.iteration} {tag}>"


class SearchTree:
    """OPEN priority structure plus CLOSED map with re-rooting support."""

    def __init__(self, root_state: State, goal: Goal, weight: float, evaluator, iteration: int = 1):
        if weight < 1:
            raise ValueError("heuristic weight must be >= 1")
        self.w = float(weight)
        self.nodes: dict[State, SearchNode] = {}
        self._heap: list[tuple[float, int, int, int, SearchNode]] = []
        self._push_seq = 0
        self._node_seq = 0
        self.root = self._new_node(root_state, 0, evaluator(root_state, goal), None, None, iteration)
        self.push(self.root)

    # -- node/heap primitives -------------------------------------------------

    def _new_node(self, state, g, h, parent, incoming, iteration) -> SearchNode:
        node = SearchNode(state, g, h, parent, incoming, iteration, self._node_seq)
        self._node_seq += 1
        self.nodes[state] = node
        return node

    def f(self, node: SearchNode) -> float:
        return node.g + self.w * node.h

    def push(self, node: SearchNode):
        """(Re)insert a node into OPEN under its current f; supersedes old entries."""
        node.status = OPEN
        node.version += 1
        self._push_seq += 1
        heapq.heappush(self._heap, (self.f(node), -node.g, self._push_seq, node.version, node))

    def add_child(self, parent: SearchNode, action: GroundAction, state: State, g: int, h: float, iteration: int) -> SearchNode:
        node = self._new_node(state, g, h, parent, action, iteration)
        self.push(node)
        return node

    def _valid_top(self) -> SearchNode | None:
        heap = self._heap
        while heap:
            _, _, _, version, node = heap[0]
            if node.status == OPEN and node.version == version and node.state in self.nodes:
                return node
            heapq.heappop(heap)
        return None

    def select_min(self) -> SearchNode:
        """Best OPEN node by f = g + w*h; ties prefer larger g, then FIFO.

        The node is not removed: the search engine closes it explicitly
        after the goal test.
        """
        node = self._valid_top()
        if node is None:
            raise EmptyOpen()
        return node

    def close_min(self, node: SearchNode):
        """Move the current top (previously returned by select_min) to CLOSED."""
        top = self._valid_top()
        assert top is node, "close_min must follow select_min"
        heapq.heappop(self._heap)
        node.status = CLOSED

    def open_is_empty(self) -> bool:
        return self._valid_top() is None

    def open_nodes(self) -> list[SearchNode]:
        return [n for n in self.nodes.values() if n.status == OPEN]

    def closed_nodes(self) -> list[SearchNode]:
        return [n for n in self.nodes.values() if n.status == CLOSED]

    def __len__(self):
        return len(self.nodes)

    # -- tree-level operations ------------------------------------------------

    def extract_plan(self, node: SearchNode) -> list[GroundAction]:
        """Incoming actions along the root-to-node chain, execution order."""
        actions: list[GroundAction] = []
        cur = node
        while cur.parent is not None:
            actions.append(cur.incoming)
            cur = cur.parent
        assert cur is self.root, "node does not chain back to the root"
        actions.reverse()
        return actions

    def contains_goal(self, goal: Goal) -> SearchNode | None:
        """A stored node satisfying the goal: CLOSED first, then OPEN leaves.

        Within each list the match with the lowest g wins, ties by creation
        order.  Complete goals are a single identity lookup.
        """
        if goal.complete:
            return self.nodes.get(goal.props)
        mask = goal.props
        best = None
        for status in (CLOSED, OPEN):
            for node in self.nodes.values():
                if node.status != status:
                    continue
                if node.state & mask == mask:
                    if best is None or (node.g, node.seq) < (best.g, best.seq):
                        best = node
            if best is not None:
                return best
        return None

    def contains_goal_closed(self, goal: Goal) -> SearchNode | None:
        """Goal containment restricted to CLOSED (what GFRA*-style checks)."""
        if goal.complete:
            node = self.nodes.get(goal.props)
            return node if node is not None and node.status == CLOSED else None
        mask = goal.props
        best = None
        for node in self.nodes.values():
            if node.status == CLOSED and node.state & mask == mask:
                if best is None or (node.g, node.seq) < (best.g, best.seq):
                    best = node
        return best

    def delete_states_out_of_tree(self, state: State):
        """Re-root at the node for `state`, dropping everything off its subtree.

        g values are deliberately left as they are: within one episode all
        comparisons share the old offset, and the next episode reseeds OPEN
        anyway.
        """
        new_root = self.nodes.get(state)
        if new_root is None:
            raise StateNotInTree(f"state {state:#x} is not stored in the tree")
        if new_root is self.root:
            return
        keep: dict[int, bool] = {id(new_root): True}
        for node in self.nodes.values():
            chain = []
            cur = node
            while True:
                verdict = keep.get(id(cur))
                if verdict is not None:
                    break
                chain.append(cur)
                if cur.parent is None:
                    verdict = False
                    break
                cur = cur.parent
            for n in chain:
                keep[id(n)] = verdict
        self.nodes = {n.state: n for n in self.nodes.values() if keep.get(id(n))}
        new_root.parent = None
        new_root.incoming = None
        self.root = new_root
        self._heap = []
        for node in self.nodes.values():
            if node.status == OPEN:
                self.push(node)

    def update_search_tree(self, state: State, goal: Goal, iteration: int, evaluator):
        """Conservative goal-change update: fold OPEN into CLOSED, reseed with `state`.

        Exactly one heuristic call is made (for `state`); every other node
        keeps its stale h and old stamp, to be refreshed lazily if the next
        search touches it.
        """
        for node in self.nodes.values():
            node.status = CLOSED
        self._heap = []
        node = self.nodes.get(state)
        if node is None:
            node = self._new_node(state, 0, 0.0, None, None, iteration)
        node.h = evaluator(state, goal)
        node.iteration = iteration
        self.push(node)

    def refresh_all(self, goal: Goal, iteration: int, evaluator):
        """Re-evaluate h of every stored node against the new goal.

        One heuristic call per stored node; OPEN priorities are rebuilt.
        This is the aggressive update the GFRA*-style baseline uses.
        """
        for node in self.nodes.values():
            node.h = evaluator(node.state, goal)
            node.iteration = iteration
        self._heap = []
        for node in self.nodes.values():
            if node.status == OPEN:
                self.push(node)

    def dump_lines(self) -> list[str]:
        """Line-oriented debug dump for test forensics."""
        lines = []
        index = {id(n): i for i, n in enumerate(self.nodes.values())}
        for i, node in enumerate(self.nodes.values()):
            parent = index.get(id(node.parent), -1) if node.parent is not None else -1
            tag = "open" if node.status == OPEN else "closed"
            lines.append(
                f"node={i} state={node.state:#x} g={node.g} h={node.h} "
                f"iter={node.iteration} parent={parent} {tag}"
            )
        return lines
