#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>

#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "cim/query.hpp"
#include "cim/workspace.hpp"

using namespace cim;
namespace fs = std::filesystem;

namespace {

constexpr double kRoundTripBudgetSeconds = 10.0;
constexpr double kDifferentialBudgetSeconds = 60.0;
constexpr std::size_t kRandomInstances = 200;
constexpr std::size_t kRandomQueries = 500;
constexpr std::size_t kMinSuiteQueries = 20;

const fs::path kOlympic = fs::path(CIM_FIXTURE_DIR) / "olympic";

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& criterion) {
    Outcome o;
    try {
        o = criterion();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    return buf;
}

const Session& olympic() {
    static const auto s = Session::open(kOlympic);
    return *s;
}

// ---------------------------------------------------------------- criteria

Outcome round_trip() {
    const auto start = std::chrono::steady_clock::now();
    std::size_t failed = 0;
    auto check = [&](const CdlModel& c, const SdlModel& s, const MdlModel& m) {
        failed += !equivalent(parse_cdl(serialize(c)), c);
        failed += !equivalent(parse_sdl(serialize(s)), s);
        failed += !equivalent(parse_mdl(serialize(m)), m);
    };
    const Workspace& w = olympic().workspace;
    check(w.cdl, w.sdl, w.mdl);
    for (std::uint64_t seed = 0; seed < kRandomInstances; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        check(in.cdl, in.sdl, in.mdl);
    }
    const double t = seconds_since(start);
    return {failed == 0 && t < kRoundTripBudgetSeconds,
            "Olympic + " + std::to_string(kRandomInstances) + " random instances, " + std::to_string(failed) +
                " failures, " + fmt(t) + " (budget " + fmt(kRoundTripBudgetSeconds) + ")"};
}

Outcome weekend_soundness() {
    const Session& s = olympic();
    const std::vector<std::string> cols = {"DayID", "Date", "DayOfWeek"};
    const Relation weekend = s.store.evaluate(s.compiled.views.level("Weekend")->body.project(cols));
    const Relation weekday = s.store.evaluate(s.compiled.views.level("Weekday")->body.project(cols));
    std::size_t unsound = 0;
    for (const auto& row : weekend.rows) unsound += !(row[2] == Value("Sat") || row[2] == Value("Sun"));
    // Projection of the Day table, read straight from its rows.
    const Relation& day = *s.store.find("Day");
    Relation projected{weekend.schema, {}};
    for (const auto& row : day.rows) projected.rows.push_back({row[*day.index_of("DayID")], row[*day.index_of("Date")], row[*day.index_of("DayOfWeek")]});
    Relation both = weekday;
    both.rows.insert(both.rows.end(), weekend.rows.begin(), weekend.rows.end());
    const bool partition = same_bag(both, projected);
    const std::size_t facts = s.store.find("Attends")->rows.size();
    return {unsound == 0 && partition && facts == 10000 && !weekend.rows.empty(),
            std::to_string(weekend.rows.size()) + " weekend rows, " + std::to_string(unsound) +
                " outside {Sat,Sun}; weekday+weekend " + (partition ? "==" : "!=") + " Day (" +
                std::to_string(day.rows.size()) + " rows); " + std::to_string(facts) + " facts"};
}

Outcome year_view() {
    const Session& s = olympic();
    const Relation view = s.store.evaluate(s.compiled.views.level("Year")->body);
    // Nested-loop join WeekMonth.YearID = Year.YearID, projected onto the Year properties, duplicates removed.
    const Relation& wm = *s.store.find("WeekMonth");
    const Relation& year = *s.store.find("Year");
    const auto wm_year = *wm.index_of("YearID");
    const auto wm_kind = *wm.index_of("Kind");
    const auto y_id = *year.index_of("YearID");
    const auto y_number = *year.index_of("YearNumber");
    std::set<Row> joined;
    for (const auto& w : wm.rows)
        for (const auto& y : year.rows)
            if (!w[wm_year].is_null() && w[wm_year] == y[y_id]) joined.insert({y[y_id], y[y_number], w[wm_kind]});
    Relation expected{{{"YearID", DataType::Integer}, {"YearNumber", DataType::Integer}, {"Granularity", DataType::String}}, {}};
    expected.rows.assign(joined.begin(), joined.end());
    const bool equal = same_bag(view, expected);
    return {equal, "Year view " + std::to_string(view.rows.size()) + " rows " + (equal ? "==" : "!=") +
                       " nested-loop join of WeekMonth and Year (" + std::to_string(expected.rows.size()) + " rows)"};
}

std::vector<std::string> suite() {
    std::vector<std::string> out;
    std::ifstream in(kOlympic / "queries" / "suite.cql");
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

Outcome differential() {
    const auto start = std::chrono::steady_clock::now();
    const Session& s = olympic();
    const Workspace& w = s.workspace;
    std::vector<std::string> mismatches;
    auto compare = [&](const CqlQuery& q, const CdlModel& cdl, const SdlModel& sdl, const MdlModel& mdl,
                       const ViewSet& views, const Store& store, const std::string& label) {
        if (!same_bag(execute(q, views, cdl, store), oracle_execute(q, cdl, sdl, mdl, store)))
            mismatches.push_back(label + ": " + q.to_text());
    };

    // (a) the Whistler weekend query
    const CqlQuery weekend = parse_cql(read_file(kOlympic / "queries" / "whistler_weekend.cql"));
    compare(weekend, w.cdl, w.sdl, w.mdl, s.compiled.views, s.store, "weekend");

    // (b) hand-written suite; record which functions and relationships it exercises
    const auto queries = suite();
    std::set<AggregateFn> fns;
    std::set<std::string> rels;
    for (const auto& text : queries) {
        const CqlQuery q = parse_cql(text);
        const ResolvedQuery r = resolve(q, w.cdl);
        fns.insert(r.fn);
        for (const auto& d : r.dimensions)
            for (const auto& path : d.paths)
                for (const auto& rel : path) rels.insert(rel.id());
        compare(q, w.cdl, w.sdl, w.mdl, s.compiled.views, s.store, "suite");
    }
    std::size_t all_rels = w.cdl.relationships().size();

    // (c) random queries over random instances
    std::mt19937_64 rng(500);
    std::size_t random = 0;
    std::size_t non_empty = 0;
    for (std::uint64_t seed = 1000; random < kRandomQueries; ++seed) {
        const auto in = fixtures::generate_random_instance(seed);
        const Store store = in.store();
        const CompileResult c = compile(in.cdl, in.sdl, in.mdl);
        for (int k = 0; k < 10 && random < kRandomQueries; ++k, ++random) {
            const CqlQuery q = fixtures::random_query(in, rng);
            non_empty += !execute(q, c.views, in.cdl, store).rows.empty();
            compare(q, in.cdl, in.sdl, in.mdl, c.views, store, "seed " + std::to_string(seed));
        }
    }
    const double t = seconds_since(start);
    const bool ok = mismatches.empty() && queries.size() >= kMinSuiteQueries && fns.size() == 5 &&
                    rels.size() == all_rels && t < kDifferentialBudgetSeconds;
    std::string detail = "weekend + " + std::to_string(queries.size()) + " suite queries (" + std::to_string(fns.size()) +
                         "/5 functions, " + std::to_string(rels.size()) + "/" + std::to_string(all_rels) +
                         " relationships) + " + std::to_string(random) + " random (" + std::to_string(non_empty) +
                         " non-empty); " + std::to_string(mismatches.size()) + " mismatches; " + fmt(t) + " (budget " +
                         fmt(kDifferentialBudgetSeconds) + ")";
    if (!mismatches.empty()) detail += "; first: " + mismatches.front();
    return {ok, detail};
}

Store olympic_store_with(const std::string& table, const std::string& extra) {
    const Workspace& w = olympic().workspace;
    Store s(w.sdl);
    for (const Table* t : w.sdl.tables()) {
        std::string csv = read_file(w.manifest.data / (t->name + ".csv"));
        if (t->name == table) csv += extra;
        s.load_table(*t, csv);
    }
    s.freeze();
    return s;
}

Outcome injected_violations() {
    const Session& o = olympic();
    const CdlModel& cdl = o.workspace.cdl;
    std::vector<std::string> results;
    bool ok = true;
    auto expect = [&](const std::string& name, bool detected) {
        ok &= detected;
        results.push_back(name + (detected ? " detected" : " MISSED"));
    };

    // Clean fixture.
    std::size_t clean = o.store.check_foreign_keys(o.workspace.sdl).size() +
                        check_exclusivity(cdl, o.compiled.views, o.store).size() +
                        check_cardinalities(cdl, o.compiled.views, o.store).size() +
                        check_summarizability(cdl, o.compiled.views, o.store).violations().size();
    ok &= clean == 0;
    results.push_back("clean fixture " + std::to_string(clean) + " violations");

    // Double parent: a level read through a link table.
    {
        const CdlModel c = parse_cdl(R"xml(<cdlModel name="link"><levelSet>
  <level name="A"><property name="AID" type="integer"/><key property="AID"/></level>
  <level name="B"><property name="BID" type="integer"/><key property="BID"/></level>
</levelSet><dimensionSet><dimension name="D" bottomLevel="A"/></dimensionSet>
<hierarchySet><hierarchy name="H"><parentChild child="A" parent="B" childCard="(1,n)" parentCard="(1,1)"/></hierarchy></hierarchySet><factRelationshipSet/>
</cdlModel>)xml");
        const SdlModel sdl = parse_sdl(R"xml(<sdlModel name="link"><dimensionTableSet>
  <table name="TA"><column name="ID" type="integer"/><primaryKey><columnRef name="ID"/></primaryKey></table>
  <table name="TB"><column name="ID" type="integer"/><primaryKey><columnRef name="ID"/></primaryKey></table>
  <table name="TL"><column name="LID" type="integer"/><column name="A" type="integer"/><column name="B" type="integer"/>
    <primaryKey><columnRef name="LID"/></primaryKey>
    <foreignKey table="TA"><columnRef name="A" target="ID"/></foreignKey>
    <foreignKey table="TB"><columnRef name="B" target="ID"/></foreignKey></table>
</dimensionTableSet></sdlModel>)xml");
        const MdlModel m = parse_mdl(R"xml(<mdlModel>
  <level-mapping level="A" table="TA"><property-mapping property="AID" column="ID"/></level-mapping>
  <level-mapping level="B" table="TB"><property-mapping property="BID" column="ID"/></level-mapping>
</mdlModel>)xml");
        const CompileResult r = compile(c, sdl, m);
        Store s(sdl);
        s.load_table("TA", "ID\n1\n2\n");
        s.load_table("TB", "ID\n10\n20\n");
        s.load_table("TL", "LID,A,B\n1,1,10\n2,2,10\n3,2,20\n");
        s.freeze();
        const auto v = check_summarizability(c, r.views, s).violations();
        expect("double parent", v.size() == 1 && v[0].kind == "non-strict" &&
                                    v[0].witness == std::vector<std::string>{"AID=2", "BID=10", "BID=20"});
    }

    // Dangling foreign key.
    {
        const Store s = olympic_store_with("Venue", "99,Ghost Arena,100,42\n");
        const auto v = s.check_foreign_keys(s.sdl());
        expect("dangling FK", v.size() == 1 && v[0].subject == "Venue(CityID)->City" &&
                                  v[0].witness == std::vector<std::string>{"CityID=42"});
    }

    // Overlapping exclusive conditions: Saturdays also counted as weekdays.
    {
        MdlModel m = o.workspace.mdl;
        for (auto& f : m.fragments)
            if (f.name == "S1") f.conditions[0].values.push_back("Sat");
        const CompileResult r = compile(cdl, o.workspace.sdl, m);
        const auto v = check_exclusivity(cdl, r.views, o.store);
        std::size_t saturdays = 0;
        for (const auto& row : o.store.find("Day")->rows) saturdays += row[2] == Value("Sat");
        const auto day_kind = std::count_if(v.begin(), v.end(), [](const Violation& x) { return x.subject == "DayKind"; });
        expect("overlapping exclusive conditions",
               day_kind == static_cast<long>(saturdays) && saturdays > 0 && v[0].subject == "DayKind" &&
                   v[0].witness == std::vector<std::string>{"DayID=4", "Day->Weekday", "Day->Weekend"});
    }

    // Zero parents under min=1: a venue without a city.
    {
        const Store s = olympic_store_with("Venue", "99,Ghost Arena,100,\n");
        const auto card = check_cardinalities(cdl, o.compiled.views, s);
        const auto sum = check_summarizability(cdl, o.compiled.views, s).violations();
        expect("zero parent under min=1", card.size() == 1 && card[0].subject == "Venue->City" &&
                                              card[0].witness == std::vector<std::string>{"VenueID=99"} &&
                                              sum.size() == 1 && sum[0].kind == "non-covering" &&
                                              sum[0].witness == std::vector<std::string>{"VenueID=99"});
    }

    std::string detail;
    for (const auto& r : results) detail += (detail.empty() ? "" : "; ") + r;
    return {ok, detail};
}

Outcome coverage() {
    const Session& s = olympic();
    const Workspace& w = s.workspace;
    std::size_t levels = 0;
    for (const auto& l : w.cdl.levels) levels += !w.mdl.fragments_for(FragmentKind::Level, l.name).empty();
    std::size_t rels = 0;
    for (const auto& r : w.cdl.relationships())
        rels += !w.mdl.fragments_for(FragmentKind::Level, r.child).empty() &&
                !w.mdl.fragments_for(FragmentKind::Level, r.parent).empty();
    std::size_t facts = 0;
    for (const auto& f : w.cdl.factRelationships) facts += !w.mdl.fragments_for(FragmentKind::FactRelationship, f.name).empty();
    const std::size_t expected = levels + rels + facts;
    return {s.compiled.views.size() == expected && s.compiled.diagnostics.empty(),
            std::to_string(s.compiled.views.size()) + " views, expected " + std::to_string(levels) + " levels + " +
                std::to_string(rels) + " parent-child + " + std::to_string(facts) + " fact = " + std::to_string(expected)};
}

std::pair<int, std::string> run_cli(const std::string& args) {
    const std::string cmd = std::string(CIM_CLI) + " " + args + " 2>&1";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome end_to_end() {
    const std::string ws = "'" + kOlympic.string() + "'";
    const fs::path views = fs::temp_directory_path() / "cim_acceptance_views.json";
    const fs::path query_file = kOlympic / "queries" / "whistler_weekend.cql";
    const int validate = run_cli("validate " + ws).first;
    const int compile_code = run_cli("compile " + ws + " --emit '" + views.string() + "'").first;
    const int check = run_cli("check " + ws).first;
    const auto [query, output] = run_cli("query " + ws + " -f '" + query_file.string() + "' --format csv");
    // Golden regenerated from the oracle, and the shipped copy.
    const Session& s = olympic();
    const Relation oracle = oracle_execute(parse_cql(read_file(query_file)), s.workspace.cdl, s.workspace.sdl,
                                           s.workspace.mdl, s.store);
    const std::string regenerated = to_csv(oracle.sorted());
    const std::string shipped = read_file(kOlympic / "expected" / "whistler_weekend.csv");
    const bool ok = validate == 0 && compile_code == 0 && check == 0 && query == 0 && output == regenerated &&
                    shipped == regenerated;
    return {ok, "exit codes validate=" + std::to_string(validate) + " compile=" + std::to_string(compile_code) +
                    " check=" + std::to_string(check) + " query=" + std::to_string(query) + "; query output " +
                    (output == regenerated ? "==" : "!=") + " oracle golden (" + std::to_string(oracle.rows.size()) +
                    " rows); shipped golden " + (shipped == regenerated ? "==" : "!=") + " regenerated"};
}

}  // namespace

int main() {
    report("round-trip", round_trip);
    report("weekend-view-soundness", weekend_soundness);
    report("multi-table-level", year_view);
    report("differential-query-correctness", differential);
    report("check-suite", injected_violations);
    report("compilation-coverage", coverage);
    report("end-to-end-cli", end_to_end);
    return failures == 0 ? 0 : 1;
}
