#include "iab/config.hpp"

namespace iab {

Variant variant_from_string(const std::string& s) {
    if (s == "dqn") return Variant::dqn;
    if (s == "ddqn") return Variant::ddqn;
    if (s == "dueling") return Variant::dueling;
    throw ConfigError("unknown variant '" + s + "' (expected dqn, ddqn or dueling)");
}

const char* to_string(Variant v) {
    switch (v) {
        case Variant::dqn: return "dqn";
        case Variant::ddqn: return "ddqn";
        case Variant::dueling: return "dueling";
    }
    return "?";
}

}  // namespace iab
