"""Standard MIDI File parsing (formats 0 and 1) and piano-roll rasterization.

Notes are binarized (velocity discarded) and sustain pedal is ignored: a note
sounds from its note-on to its note-off. Overlapping duplicate note-ons of
the same pitch are merged into one interval with a warning.
"""

import struct
import warnings
from dataclasses import dataclass

import numpy as np

_DEFAULT_TEMPO = 500000  # microseconds per quarter note


@dataclass(frozen=True)
class Note:
    number: int
    onset: float   # seconds
    offset: float  # seconds


def _read_vlq(data, pos):
    value = 0
    while True:
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos


def _parse_track(data):
    """One MTrk body -> (events [(tick, status, d1, d2)], tempos [(tick, us_per_qn)])."""
    events = []
    tempos = []
    pos = 0
    tick = 0
    status = None
    while pos < len(data):
        delta, pos = _read_vlq(data, pos)
        tick += delta
        byte = data[pos]
        if byte & 0x80:
            status = byte
            pos += 1
        elif status is None:
            raise ValueError("running status before any status byte")
        if status == 0xFF:  # meta
            meta_type = data[pos]
            pos += 1
            length, pos = _read_vlq(data, pos)
            body = data[pos:pos + length]
            pos += length
            if meta_type == 0x51 and length == 3:
                tempos.append((tick, (body[0] << 16) | (body[1] << 8) | body[2]))
            if meta_type == 0x2F:
                break
        elif status in (0xF0, 0xF7):  # sysex
            length, pos = _read_vlq(data, pos)
            pos += length
        else:
            kind = status & 0xF0
            n_data = 1 if kind in (0xC0, 0xD0) else 2
            d1 = data[pos]
            d2 = data[pos + 1] if n_data == 2 else 0
            pos += n_data
            if kind in (0x80, 0x90):
                events.append((tick, kind, d1, d2))
    return events, tempos


def _ticks_to_seconds(ticks, tempos, division):
    """Piecewise-linear tick -> second conversion over the tempo map."""
    tempos = sorted(tempos)
    if not tempos or tempos[0][0] > 0:
        tempos = [(0, _DEFAULT_TEMPO)] + tempos
    boundaries = [t for t, _ in tempos]
    seconds_at = [0.0]
    for i in range(1, len(tempos)):
        span = tempos[i][0] - tempos[i - 1][0]
        seconds_at.append(seconds_at[-1] + span * tempos[i - 1][1] / (division * 1e6))
    out = []
    for tick in ticks:
        i = int(np.searchsorted(boundaries, tick, side="right")) - 1
        out.append(seconds_at[i] + (tick - boundaries[i]) * tempos[i][1] / (division * 1e6))
    return out


def parse_midi(path):
    """SMF file -> list of Note, chronological by onset."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != b"MThd":
        raise ValueError(f"{path}: not a Standard MIDI File")
    header_len, fmt, n_tracks, division = struct.unpack_from(">IHHH", data, 4)
    if fmt not in (0, 1):
        raise ValueError(f"{path}: unsupported SMF format {fmt}")
    if division & 0x8000:
        raise ValueError(f"{path}: SMPTE time division unsupported")

    pos = 8 + header_len
    all_events = []
    all_tempos = []
    for _ in range(n_tracks):
        if data[pos:pos + 4] != b"MTrk":
            raise ValueError(f"{path}: malformed track header")
        (length,) = struct.unpack_from(">I", data, pos + 4)
        body = data[pos + 8:pos + 8 + length]
        pos += 8 + length
        events, tempos = _parse_track(body)
        all_events.extend(events)
        all_tempos.extend(tempos)
    all_events.sort(key=lambda e: e[0])

    ticks = [e[0] for e in all_events]
    times = _ticks_to_seconds(ticks, all_tempos, division)

    notes = []
    active = {}  # note number -> [onset_seconds, overlap_count]
    for (tick, kind, number, velocity), t in zip(all_events, times):
        is_on = kind == 0x90 and velocity > 0
        if is_on:
            if number in active:
                active[number][1] += 1
                warnings.warn(f"overlapping note-on for note {number}; merging")
            else:
                active[number] = [t, 1]
        else:
            state = active.get(number)
            if state is None:
                continue  # stray note-off
            state[1] -= 1
            if state[1] == 0:
                notes.append(Note(number, state[0], t))
                del active[number]
    if active:
        last = times[-1] if times else 0.0
        for number, (onset, _) in sorted(active.items()):
            warnings.warn(f"unterminated note {number}; closing at track end")
            notes.append(Note(number, onset, last))
    notes.sort(key=lambda n: (n.onset, n.number))
    return notes


def midi_to_pianoroll(notes, total_frames, frame_rate, n_bands=None):
    """Rasterize note intervals to an 88 x total_frames binary roll.

    Row i covers MIDI note 21 + i; frame t spans [t, t+1) / frame_rate
    seconds, and a cell is 1 iff the note interval overlaps the frame span.
    """
    if n_bands is not None and abs(frame_rate - 16000.0 / n_bands) > 1e-9:
        raise ValueError(
            f"frame rate {frame_rate} inconsistent with 16000/{n_bands}")
    roll = np.zeros((88, total_frames), dtype=np.float64)
    for note in notes:
        if not 21 <= note.number <= 108:
            raise ValueError(f"note {note.number} outside the 88-key range 21..108")
        first = int(np.floor(note.onset * frame_rate))
        last = int(np.ceil(note.offset * frame_rate)) - 1
        first = max(first, 0)
        last = min(last, total_frames - 1)
        if last >= first:
            roll[note.number - 21, first:last + 1] = 1.0
    return roll
