#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libtrace.py: colored status display for swarm runs
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.

import sys

FG_CODE = {  # ANSI foreground colors
    'black': 30, 'red': 31, 'green': 32, 'yellow': 33,
    'blue' : 34, 'magenta': 35, 'cyan': 36, 'white': 37, 'default': 39,
}
DEC_CODE = {  # ANSI text decorations
    'default': 0, 'bold': 1, 'dark': 2, 'italic': 3, 'underline': 4,
    'reverse': 7, 'strike': 9,
}

def esc(table, name):
    ''' returns escape sequence of name in table '''
    if name not in table:
        raise ValueError(f'undefined display attribute: {name}')
    return f'\x1b[{table[name]}m'

def _stderr(color, args):
    print(esc(FG_CODE, color), end='', file=sys.stderr)
    for arg in args:
        print(arg, end='', file=sys.stderr)
    print(esc(FG_CODE, 'default'), file=sys.stderr)

def err(*args):
    _stderr('red', args)

def warn(*args):
    _stderr('yellow', args)

def info(*args):
    _stderr('green', args)

class Trace:
    ''' level-gated display of run status

        level 0: run summary, 1: progress and switch events,
        2: per-step diagnostics
    '''
    def __init__(self, fp=sys.stderr, t_level=0, is_forced=False):
        self.fp      = fp
        self.t_level = t_level
        self.colored = bool(fp) and (is_forced or fp.isatty())

    def enabled(self, level):
        return bool(self.fp) and level <= self.t_level

    def msg(self, level, arg, fg='', dec=''):
        ''' returns arg decorated when level is enabled, or empty string '''
        if not self.enabled(level) or not arg:
            return ''
        if not self.colored or not (fg or dec):
            return arg
        head = (esc(FG_CODE, fg) if fg else '') + (esc(DEC_CODE, dec) if dec else '')
        tail = (esc(DEC_CODE, 'default') if dec else '') + (esc(FG_CODE, 'default') if fg else '')
        return head + arg + tail

    def show(self, level, arg, fg='', dec='', end='\n'):
        ''' prints arg when level is enabled '''
        if not self.enabled(level):
            return
        print(self.msg(level, arg, fg, dec), end=end, file=self.fp)
        self.fp.flush()

# EOF
