#pragma once
// Maps a byte offset or a JSON pointer back to (line, column) in the source text,
// for error messages about documents nlohmann::json parsed successfully.

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phg::detail {

struct TextPosition {
    std::size_t line = 1;
    std::size_t column = 1;
};

inline TextPosition position_of_offset(std::string_view text, std::size_t offset) {
    TextPosition pos;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++pos.line;
            pos.column = 1;
        } else {
            ++pos.column;
        }
    }
    return pos;
}

class JsonLocator {
public:
    explicit JsonLocator(std::string_view text) : text_(text) {}

    /// Offset of the value addressed by `path` (object keys or array indices),
    /// or of the deepest reachable prefix when the path does not exist.
    std::size_t locate(const std::vector<std::string>& path) {
        i_ = 0;
        skip_ws();
        for (const auto& key : path) {
            if (i_ >= text_.size()) break;
            if (text_[i_] == '{') {
                if (!enter_object(key)) break;
            } else if (text_[i_] == '[') {
                if (!enter_array(std::stoul(key))) break;
            } else {
                break;
            }
        }
        return i_;
    }

private:
    void skip_ws() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
    }

    std::string read_string() {
        std::string out;
        ++i_;  // opening quote
        while (i_ < text_.size() && text_[i_] != '"') {
            if (text_[i_] == '\\') ++i_;
            if (i_ < text_.size()) out.push_back(text_[i_]);
            ++i_;
        }
        ++i_;
        return out;
    }

    void skip_value() {
        skip_ws();
        if (i_ >= text_.size()) return;
        const char c = text_[i_];
        if (c == '"') {
            read_string();
        } else if (c == '{' || c == '[') {
            const char close = c == '{' ? '}' : ']';
            ++i_;
            skip_ws();
            while (i_ < text_.size() && text_[i_] != close) {
                if (c == '{') {
                    read_string();
                    skip_ws();
                    ++i_;  // colon
                }
                skip_value();
                skip_ws();
                if (i_ < text_.size() && text_[i_] == ',') ++i_;
                skip_ws();
            }
            ++i_;
        } else {
            while (i_ < text_.size() && text_[i_] != ',' && text_[i_] != ']' && text_[i_] != '}' &&
                   !std::isspace(static_cast<unsigned char>(text_[i_])))
                ++i_;
        }
    }

    bool enter_object(const std::string& key) {
        ++i_;
        skip_ws();
        while (i_ < text_.size() && text_[i_] != '}') {
            const std::string k = read_string();
            skip_ws();
            ++i_;
            skip_ws();
            if (k == key) return true;
            skip_value();
            skip_ws();
            if (i_ < text_.size() && text_[i_] == ',') ++i_;
            skip_ws();
        }
        return false;
    }

    bool enter_array(std::size_t index) {
        ++i_;
        skip_ws();
        for (std::size_t n = 0; i_ < text_.size() && text_[i_] != ']'; ++n) {
            if (n == index) return true;
            skip_value();
            skip_ws();
            if (i_ < text_.size() && text_[i_] == ',') ++i_;
            skip_ws();
        }
        return false;
    }

    std::string_view text_;
    std::size_t i_ = 0;
};

}  // namespace phg::detail
