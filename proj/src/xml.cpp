#include "cim/xml.hpp"

#include <expat.h>

#include "cim/errors.hpp"

namespace cim::xml {

const std::string* Element::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

namespace {

struct Builder {
    XML_Parser parser = nullptr;
    std::vector<Element> stack;
    std::optional<Element> root;

    static void on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
        auto* b = static_cast<Builder*>(self);
        Element e;
        e.name = name;
        e.line = XML_GetCurrentLineNumber(b->parser);
        e.column = XML_GetCurrentColumnNumber(b->parser) + 1;
        for (std::size_t i = 0; attrs[i]; i += 2) e.attributes.emplace_back(attrs[i], attrs[i + 1]);
        b->stack.push_back(std::move(e));
    }

    static void on_end(void* self, const XML_Char*) {
        auto* b = static_cast<Builder*>(self);
        Element e = std::move(b->stack.back());
        b->stack.pop_back();
        if (b->stack.empty()) b->root = std::move(e);
        else b->stack.back().children.push_back(std::move(e));
    }

    static void on_text(void* self, const XML_Char* s, int len) {
        auto* b = static_cast<Builder*>(self);
        if (!b->stack.empty()) b->stack.back().text.append(s, static_cast<std::size_t>(len));
    }
};

}  // namespace

Element parse(std::string_view document) {
    Builder b;
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                        &XML_ParserFree);
    b.parser = parser.get();
    XML_SetUserData(parser.get(), &b);
    XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
    XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);
    if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) ==
        XML_STATUS_ERROR) {
        throw ParseError(std::string("XML syntax error: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                         XML_GetCurrentLineNumber(parser.get()),
                         XML_GetCurrentColumnNumber(parser.get()) + 1);
    }
    if (!b.root) throw ParseError("XML document has no root element", 1, 1);
    return std::move(*b.root);
}

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

Writer::Writer() : out_("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n") {}

void Writer::start_tag(std::string_view name,
                       std::initializer_list<std::pair<std::string_view, std::string_view>> attrs) {
    out_.append(stack_.size() * 2, ' ');
    out_ += '<';
    out_ += name;
    for (const auto& [k, v] : attrs) {
        out_ += ' ';
        out_ += k;
        out_ += "=\"";
        out_ += escape(v);
        out_ += '"';
    }
}

void Writer::open(std::string_view name,
                  std::initializer_list<std::pair<std::string_view, std::string_view>> attrs) {
    start_tag(name, attrs);
    out_ += ">\n";
    stack_.emplace_back(name);
}

void Writer::leaf(std::string_view name,
                  std::initializer_list<std::pair<std::string_view, std::string_view>> attrs) {
    start_tag(name, attrs);
    out_ += "/>\n";
}

void Writer::text_element(std::string_view name, std::string_view text) {
    start_tag(name, {});
    out_ += '>';
    out_ += escape(text);
    out_ += "</";
    out_ += name;
    out_ += ">\n";
}

void Writer::close() {
    const std::string name = std::move(stack_.back());
    stack_.pop_back();
    out_.append(stack_.size() * 2, ' ');
    out_ += "</" + name + ">\n";
}

}  // namespace cim::xml
