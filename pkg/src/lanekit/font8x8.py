"""Embedded 8x8 bitmap glyphs for metric annotations.

Digits, upper/lowercase letters, and the punctuation the annotations need.
Keeping the font in-package makes rendered text bit-testable with no font
machinery. Glyphs are authored as string art and packed to bool arrays at
import; '#' marks a set pixel.
"""

import numpy as np

_ART = {
    "0": (".###....", "#...#...", "#..##...", "#.#.#...", "##..#...", "#...#...", ".###....", "........"),
    "1": ("..#.....", ".##.....", "..#.....", "..#.....", "..#.....", "..#.....", ".###....", "........"),
    "2": (".###....", "#...#...", "....#...", "...#....", "..#.....", ".#......", "#####...", "........"),
    "3": (".###....", "#...#...", "....#...", "..##....", "....#...", "#...#...", ".###....", "........"),
    "4": ("...#....", "..##....", ".#.#....", "#..#....", "#####...", "...#....", "...#....", "........"),
    "5": ("#####...", "#.......", "####....", "....#...", "....#...", "#...#...", ".###....", "........"),
    "6": (".###....", "#.......", "#.......", "####....", "#...#...", "#...#...", ".###....", "........"),
    "7": ("#####...", "....#...", "...#....", "..#.....", "..#.....", "..#.....", "..#.....", "........"),
    "8": (".###....", "#...#...", "#...#...", ".###....", "#...#...", "#...#...", ".###....", "........"),
    "9": (".###....", "#...#...", "#...#...", ".####...", "....#...", "....#...", ".###....", "........"),
    "A": (".###....", "#...#...", "#...#...", "#####...", "#...#...", "#...#...", "#...#...", "........"),
    "B": ("####....", "#...#...", "#...#...", "####....", "#...#...", "#...#...", "####....", "........"),
    "C": (".###....", "#...#...", "#.......", "#.......", "#.......", "#...#...", ".###....", "........"),
    "D": ("####....", "#...#...", "#...#...", "#...#...", "#...#...", "#...#...", "####....", "........"),
    "E": ("#####...", "#.......", "#.......", "####....", "#.......", "#.......", "#####...", "........"),
    "F": ("#####...", "#.......", "#.......", "####....", "#.......", "#.......", "#.......", "........"),
    "G": (".###....", "#...#...", "#.......", "#..##...", "#...#...", "#...#...", ".####...", "........"),
    "H": ("#...#...", "#...#...", "#...#...", "#####...", "#...#...", "#...#...", "#...#...", "........"),
    "I": (".###....", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....", ".###....", "........"),
    "J": ("..###...", "...#....", "...#....", "...#....", "...#....", "#..#....", ".##.....", "........"),
    "K": ("#...#...", "#..#....", "#.#.....", "##......", "#.#.....", "#..#....", "#...#...", "........"),
    "L": ("#.......", "#.......", "#.......", "#.......", "#.......", "#.......", "#####...", "........"),
    "M": ("#...#...", "##.##...", "#.#.#...", "#.#.#...", "#...#...", "#...#...", "#...#...", "........"),
    "N": ("#...#...", "##..#...", "#.#.#...", "#..##...", "#...#...", "#...#...", "#...#...", "........"),
    "O": (".###....", "#...#...", "#...#...", "#...#...", "#...#...", "#...#...", ".###....", "........"),
    "P": ("####....", "#...#...", "#...#...", "####....", "#.......", "#.......", "#.......", "........"),
    "Q": (".###....", "#...#...", "#...#...", "#...#...", "#.#.#...", "#..#....", ".##.#...", "........"),
    "R": ("####....", "#...#...", "#...#...", "####....", "#.#.....", "#..#....", "#...#...", "........"),
    "S": (".####...", "#.......", "#.......", ".###....", "....#...", "....#...", "####....", "........"),
    "T": ("#####...", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....", "........"),
    "U": ("#...#...", "#...#...", "#...#...", "#...#...", "#...#...", "#...#...", ".###....", "........"),
    "V": ("#...#...", "#...#...", "#...#...", "#...#...", "#...#...", ".#.#....", "..#.....", "........"),
    "W": ("#...#...", "#...#...", "#...#...", "#.#.#...", "#.#.#...", "##.##...", "#...#...", "........"),
    "X": ("#...#...", "#...#...", ".#.#....", "..#.....", ".#.#....", "#...#...", "#...#...", "........"),
    "Y": ("#...#...", "#...#...", ".#.#....", "..#.....", "..#.....", "..#.....", "..#.....", "........"),
    "Z": ("#####...", "....#...", "...#....", "..#.....", ".#......", "#.......", "#####...", "........"),
    "a": ("........", "........", ".###....", "....#...", ".####...", "#...#...", ".####...", "........"),
    "b": ("#.......", "#.......", "####....", "#...#...", "#...#...", "#...#...", "####....", "........"),
    "c": ("........", "........", ".###....", "#.......", "#.......", "#.......", ".###....", "........"),
    "d": ("....#...", "....#...", ".####...", "#...#...", "#...#...", "#...#...", ".####...", "........"),
    "e": ("........", "........", ".###....", "#...#...", "#####...", "#.......", ".###....", "........"),
    "f": ("..##....", ".#......", "####....", ".#......", ".#......", ".#......", ".#......", "........"),
    "g": ("........", "........", ".####...", "#...#...", "#...#...", ".####...", "....#...", ".###...."),
    "h": ("#.......", "#.......", "####....", "#...#...", "#...#...", "#...#...", "#...#...", "........"),
    "i": ("..#.....", "........", ".##.....", "..#.....", "..#.....", "..#.....", ".###....", "........"),
    "j": ("...#....", "........", "..##....", "...#....", "...#....", "...#....", "#..#....", ".##....."),
    "k": ("#.......", "#.......", "#..#....", "#.#.....", "##......", "#.#.....", "#..#....", "........"),
    "l": (".##.....", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....", ".###....", "........"),
    "m": ("........", "........", "##.#....", "#.#.#...", "#.#.#...", "#.#.#...", "#.#.#...", "........"),
    "n": ("........", "........", "####....", "#...#...", "#...#...", "#...#...", "#...#...", "........"),
    "o": ("........", "........", ".###....", "#...#...", "#...#...", "#...#...", ".###....", "........"),
    "p": ("........", "........", "####....", "#...#...", "#...#...", "####....", "#.......", "#......."),
    "q": ("........", "........", ".####...", "#...#...", "#...#...", ".####...", "....#...", "....#..."),
    "r": ("........", "........", "#.##....", "##......", "#.......", "#.......", "#.......", "........"),
    "s": ("........", "........", ".####...", "#.......", ".###....", "....#...", "####....", "........"),
    "t": (".#......", ".#......", "####....", ".#......", ".#......", ".#......", "..##....", "........"),
    "u": ("........", "........", "#...#...", "#...#...", "#...#...", "#...#...", ".####...", "........"),
    "v": ("........", "........", "#...#...", "#...#...", "#...#...", ".#.#....", "..#.....", "........"),
    "w": ("........", "........", "#...#...", "#...#...", "#.#.#...", "#.#.#...", ".#.#....", "........"),
    "x": ("........", "........", "#...#...", ".#.#....", "..#.....", ".#.#....", "#...#...", "........"),
    "y": ("........", "........", "#...#...", "#...#...", "#...#...", ".####...", "....#...", ".###...."),
    "z": ("........", "........", "#####...", "...#....", "..#.....", ".#......", "#####...", "........"),
    "+": ("........", "..#.....", "..#.....", "#####...", "..#.....", "..#.....", "........", "........"),
    "-": ("........", "........", "........", "#####...", "........", "........", "........", "........"),
    ".": ("........", "........", "........", "........", "........", ".##.....", ".##.....", "........"),
    ":": ("........", ".##.....", ".##.....", "........", ".##.....", ".##.....", "........", "........"),
    " ": ("........", "........", "........", "........", "........", "........", "........", "........"),
}

GLYPH_SIZE = 8

GLYPHS = {
    ch: np.array([[c == "#" for c in row] for row in rows], dtype=bool)
    for ch, rows in _ART.items()
}
GLYPHS["−"] = GLYPHS["-"]  # typographic minus renders like the ASCII one


def glyph_for(ch: str) -> np.ndarray:
    """Glyph bitmap for a character; unknown characters render as space."""
    return GLYPHS.get(ch, GLYPHS[" "])
