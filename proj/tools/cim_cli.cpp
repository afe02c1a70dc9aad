#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <iostream>
#include <thread>

#include "cim/compiler.hpp"
#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "cim/query.hpp"
#include "cim/service.hpp"
#include "cim/workspace.hpp"

namespace {

using namespace cim;

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kEnvironment = 2;

void print(const std::vector<Diagnostic>& diagnostics) {
    for (const auto& d : diagnostics) std::cerr << to_string(d) << '\n';
}

/// Opens and validates; returns an exit code when the workspace is unusable.
std::optional<int> open_valid(const std::string& dir, Workspace& out) {
    out = Workspace::open(dir);
    const auto diagnostics = out.validate();
    print(diagnostics);
    if (!diagnostics.empty()) return kDomain;
    return std::nullopt;
}

int cmd_validate(const std::string& dir) {
    Workspace w;
    if (auto code = open_valid(dir, w)) return *code;
    return kOk;
}

int cmd_compile(const std::string& dir, const std::string& emit) {
    Workspace w;
    if (auto code = open_valid(dir, w)) return *code;
    const CompileResult r = compile(w.cdl, w.sdl, w.mdl);
    print(r.diagnostics);
    if (!r.ok()) return kDomain;
    const std::string doc = r.views.to_json().dump(2) + "\n";
    if (emit.empty() || emit == "-") std::cout << doc;
    else write_file(emit, doc);
    return kOk;
}

int cmd_query(const std::string& dir, std::string text, const std::string& file, const std::string& format,
              bool oracle, bool keep_bottom, bool materialize) {
    if (!file.empty()) text = read_file(file);
    Workspace w;
    if (auto code = open_valid(dir, w)) return *code;
    CqlQuery query;
    try {
        const auto first = text.find_first_not_of(" \t\r\n");
        query = first != std::string::npos && text[first] == '{' ? CqlQuery::from_json(nlohmann::json::parse(text))
                                                                 : parse_cql(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "error: malformed query JSON: " << e.what() << '\n';
        return kDomain;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
    const Store store = w.load_store();
    const QueryOptions options{keep_bottom};
    Relation result;
    if (oracle) {
        result = oracle_execute(query, w.cdl, w.sdl, w.mdl, store, options);
    } else {
        CompileResult r = compile(w.cdl, w.sdl, w.mdl);
        print(r.diagnostics);
        if (materialize) r.views.materialize(store);
        result = execute(query, r.views, w.cdl, store, options);
    }
    if (format == "json") std::cout << result_to_json(result).dump(2) << '\n';
    else if (format == "csv") std::cout << to_csv(result.sorted());
    else std::cout << format_table(result.sorted());
    return kOk;
}

bool report(const std::string& title, const std::vector<Violation>& violations) {
    std::cout << title << ": " << (violations.empty() ? "ok" : std::to_string(violations.size()) + " violation(s)")
              << '\n';
    for (const auto& v : violations) std::cout << "  " << to_string(v) << '\n';
    return violations.empty();
}

int cmd_check(const std::string& dir) {
    Workspace w;
    if (auto code = open_valid(dir, w)) return *code;
    const Store store = w.load_store();
    const CompileResult r = compile(w.cdl, w.sdl, w.mdl);
    print(r.diagnostics);
    if (!r.ok()) return kDomain;
    bool clean = report("foreign keys", store.check_foreign_keys(w.sdl));
    clean &= report("exclusivity", check_exclusivity(w.cdl, r.views, store));
    clean &= report("cardinality", check_cardinalities(w.cdl, r.views, store));
    const SummarizabilityReport s = check_summarizability(w.cdl, r.views, store);
    clean &= report("summarizability", s.violations());
    for (const auto& h : s.hierarchies)
        std::cout << "  " << h.hierarchy << ": " << (h.summarizable ? "summarizable" : "not summarizable") << '\n';
    return clean ? kOk : kDomain;
}

Service* g_service = nullptr;

int cmd_serve(const std::string& dir, const std::string& host, int port, bool materialize) {
    Service service;
    service.bind(host, port);
    g_service = &service;
    std::signal(SIGINT, [](int) { g_service->stop(); });
    std::signal(SIGTERM, [](int) { g_service->stop(); });
    std::thread loader([&] { service.load(dir, materialize); });
    std::cerr << "listening on http://" << host << ':' << port << '\n';
    service.listen();
    loader.join();
    return kOk;
}

int cmd_generate(std::uint64_t seed, std::size_t scale, const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out + ": " + ec.message());
    for (const auto& [table, csv] : fixtures::generate_olympic_data(seed, scale))
        write_file(std::filesystem::path(out) / (table + ".csv"), csv);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cim: conceptual model run-time over CSV warehouses"};
    app.require_subcommand(1);
    std::string dir = ".";

    auto* validate = app.add_subcommand("validate", "Validate the workspace models");
    validate->add_option("workspace", dir, "Workspace directory or cim.toml");

    std::string emit;
    auto* compile_cmd = app.add_subcommand("compile", "Compile views and emit the view set as JSON");
    compile_cmd->add_option("workspace", dir, "Workspace directory or cim.toml");
    compile_cmd->add_option("--emit", emit, "Output path (default: standard output)");

    std::string text;
    std::string file;
    std::string format = "table";
    bool oracle = false;
    bool keep_bottom = false;
    bool materialize = false;
    auto* query = app.add_subcommand("query", "Run a CQL query (text or JSON)");
    query->add_option("workspace", dir, "Workspace directory or cim.toml")->required();
    query->add_option("query", text, "Query text");
    query->add_option("-f,--file", file, "Read the query from a file");
    query->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
    query->add_flag("--oracle", oracle, "Answer with the reference evaluator instead of compiled views");
    query->add_flag("--keep-bottom-grain", keep_bottom, "Group unmentioned dimensions at their bottom level");
    query->add_flag("--materialize", materialize, "Materialize views before evaluation");

    auto* check = app.add_subcommand("check", "Report foreign key, exclusivity, cardinality and summarizability violations");
    check->add_option("workspace", dir, "Workspace directory or cim.toml");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API");
    serve->add_option("workspace", dir, "Workspace directory or cim.toml");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--port", port, "Listen port");
    serve->add_flag("--materialize", materialize, "Materialize views after loading");

    std::uint64_t seed = 2010;
    std::size_t scale = 10000;
    std::string out = "data";
    auto* generate = app.add_subcommand("generate", "Write Olympic fixture CSV data");
    generate->add_option("--seed", seed, "Random seed");
    generate->add_option("--scale", scale, "Number of Attends facts");
    generate->add_option("--out", out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kEnvironment;
    }

    try {
        if (*validate) return cmd_validate(dir);
        if (*compile_cmd) return cmd_compile(dir, emit);
        if (*query) {
            if (text.empty() == file.empty()) {
                std::cerr << "error: give exactly one of query text or --file\n";
                return kEnvironment;
            }
            return cmd_query(dir, text, file, format, oracle, keep_bottom, materialize);
        }
        if (*check) return cmd_check(dir);
        if (*serve) return cmd_serve(dir, host, port, materialize);
        if (*generate) return cmd_generate(seed, scale, out);
    } catch (const QueryError& e) {
        std::cerr << "error: " << e.code << ": " << e.what() << '\n';
        if (!e.candidates.empty()) {
            std::cerr << "  did you mean:";
            for (const auto& c : e.candidates) std::cerr << ' ' << c;
            std::cerr << '\n';
        }
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEnvironment;
    }
    return kOk;
}
