#pragma once

#include <map>
#include <string>
#include <string_view>

namespace seldsynth {

// Expands {name} placeholders in command templates; unknown placeholders
// are left intact.
inline std::string expand_template(std::string_view templ,
                                   const std::map<std::string, std::string>& vars) {
    std::string out(templ);
    for (const auto& [key, value] : vars) {
        const std::string placeholder = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace seldsynth
