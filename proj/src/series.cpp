#include "stec/series.hpp"

#include <algorithm>
#include <cctype>

namespace stec {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(MoiKind kind) {
    switch (kind) {
        case MoiKind::Kill: return "kill";
        case MoiKind::Death: return "death";
        case MoiKind::Assist: return "assist";
    }
    return "?";
}

std::string_view to_string(EventFilter filter) {
    switch (filter) {
        case EventFilter::Kill: return "kill";
        case EventFilter::Death: return "death";
        case EventFilter::Assist: return "assist";
        case EventFilter::All: return "all";
    }
    return "?";
}

std::string_view to_string(SkillLabel label) {
    return label == SkillLabel::Amateur ? "Amateur" : "Professional";
}

std::optional<MoiKind> parse_moi_kind(std::string_view text) {
    const std::string t = lower(text);
    if (t == "kill") return MoiKind::Kill;
    if (t == "death") return MoiKind::Death;
    if (t == "assist") return MoiKind::Assist;
    return std::nullopt;
}

std::optional<EventFilter> parse_event_filter(std::string_view text) {
    const std::string t = lower(text);
    if (t == "kill") return EventFilter::Kill;
    if (t == "death") return EventFilter::Death;
    if (t == "assist") return EventFilter::Assist;
    if (t == "all") return EventFilter::All;
    return std::nullopt;
}

std::optional<SkillLabel> parse_skill_label(std::string_view text) {
    const std::string t = lower(text);
    if (t == "amateur") return SkillLabel::Amateur;
    if (t == "professional") return SkillLabel::Professional;
    return std::nullopt;
}

}  // namespace stec
