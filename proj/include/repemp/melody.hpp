#pragma once

#include <optional>
#include <string>
#include <vector>

#include "repemp/rational.hpp"

namespace repemp {

// A single note: MIDI pitch in [0,127], positive rational duration in beats.
struct Note {
    int pitch = 60;
    Rational duration{1};

    friend bool operator==(const Note& a, const Note& b) {
        return a.pitch == b.pitch && a.duration == b.duration;
    }
};

// Finite ordered note sequence. Length 0 is legal and equal only to itself.
struct Melody {
    std::vector<Note> notes;

    Melody() = default;
    explicit Melody(std::vector<Note> ns) : notes(std::move(ns)) {}

    std::size_t size() const { return notes.size(); }
    bool empty() const { return notes.empty(); }

    void append(const Melody& m) {
        notes.insert(notes.end(), m.notes.begin(), m.notes.end());
    }

    friend bool operator==(const Melody& a, const Melody& b) { return a.notes == b.notes; }
    friend bool operator!=(const Melody& a, const Melody& b) { return !(a == b); }
};

// Behavioral-equivalence fold applied before melodies are compared.
// pitch_mod = 12 folds pitches onto octave classes; 0 disables folding.
struct MelodyEquivalence {
    int pitch_mod = 0;

    int fold(int pitch) const {
        if (pitch_mod <= 0) return pitch;
        int r = pitch % pitch_mod;
        return r < 0 ? r + pitch_mod : r;
    }
    bool equal(const Melody& a, const Melody& b) const;
    // Canonical comparison key; equal(a,b) iff key(a)==key(b).
    std::string key(const Melody& m) const;
};

void check_note(const Note& n); // throws std::domain_error on invariant breach

// Scientific pitch ("C4", "F#3", "Bb2") -> MIDI, with C4 = 60.
std::optional<int> parse_pitch_name(const std::string& text);
// Canonical pitch name (sharps preferred): 60 -> "C4".
std::string pitch_name(int midi);

// Canonical melody text: "[C4, D4:1/2]" (duration omitted when 1).
std::string melody_str(const Melody& m);

} // namespace repemp
