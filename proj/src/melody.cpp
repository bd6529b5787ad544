#include "repemp/melody.hpp"

#include <array>
#include <cctype>
#include <stdexcept>

namespace repemp {

void check_note(const Note& n) {
    if (n.pitch < 0 || n.pitch > 127)
        throw std::domain_error("note pitch out of MIDI range [0,127]: " + std::to_string(n.pitch));
    if (!n.duration.positive())
        throw std::domain_error("note duration must be positive: " + n.duration.str());
}

bool MelodyEquivalence::equal(const Melody& a, const Melody& b) const {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (fold(a.notes[i].pitch) != fold(b.notes[i].pitch)) return false;
        if (a.notes[i].duration != b.notes[i].duration) return false;
    }
    return true;
}

std::string MelodyEquivalence::key(const Melody& m) const {
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(fold(m.notes[i].pitch));
        out += "@";
        out += m.notes[i].duration.str();
    }
    out += "]";
    return out;
}

std::optional<int> parse_pitch_name(const std::string& text) {
    static constexpr std::array<int, 7> base = {9, 11, 0, 2, 4, 5, 7}; // A..G
    if (text.empty()) return std::nullopt;
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    if (c < 'A' || c > 'G') return std::nullopt;
    int semitone = base[static_cast<std::size_t>(c - 'A')];
    std::size_t i = 1;
    if (i < text.size() && (text[i] == '#' || text[i] == 'b')) {
        semitone += text[i] == '#' ? 1 : -1;
        ++i;
    }
    if (i >= text.size()) return std::nullopt;
    bool neg = false;
    if (text[i] == '-') { neg = true; ++i; }
    if (i >= text.size()) return std::nullopt;
    int octave = 0;
    for (; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
        octave = octave * 10 + (text[i] - '0');
    }
    if (neg) octave = -octave;
    const int midi = (octave + 1) * 12 + semitone;
    if (midi < 0 || midi > 127) return std::nullopt;
    return midi;
}

std::string pitch_name(int midi) {
    static constexpr std::array<const char*, 12> names = {
        "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
    if (midi < 0 || midi > 127) return std::to_string(midi);
    const int octave = midi / 12 - 1;
    return std::string(names[static_cast<std::size_t>(midi % 12)]) + std::to_string(octave);
}

std::string melody_str(const Melody& m) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ", ";
        out += pitch_name(m.notes[i].pitch);
        if (m.notes[i].duration != Rational{1}) {
            out += ":";
            out += m.notes[i].duration.str();
        }
    }
    out += "]";
    return out;
}

} // namespace repemp
