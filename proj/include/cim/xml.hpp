#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cim::xml {

/// Minimal element tree. Text content is the concatenated character data.
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<Element> children;
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;

    const std::string* attribute(std::string_view key) const;
};

/// Parses a whole document; throws ParseError with the expat position.
Element parse(std::string_view document);

/// Pretty-printing writer producing UTF-8 with two-space indentation.
class Writer {
public:
    Writer();
    void open(std::string_view name, std::initializer_list<std::pair<std::string_view, std::string_view>> attrs = {});
    void leaf(std::string_view name, std::initializer_list<std::pair<std::string_view, std::string_view>> attrs = {});
    void text_element(std::string_view name, std::string_view text);
    void close();
    std::string str() const { return out_; }

private:
    void start_tag(std::string_view name,
                   std::initializer_list<std::pair<std::string_view, std::string_view>> attrs);
    std::string out_;
    std::vector<std::string> stack_;
};

std::string escape(std::string_view text);

}  // namespace cim::xml
