#include "cim/fixtures.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <array>
#include <set>
#include <tuple>

namespace cim::fixtures {

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
bool chance(Rng& rng, unsigned percent) { return rng() % 100 < percent; }

Relation relation(std::initializer_list<Column> columns) { return Relation{std::vector<Column>(columns), {}}; }

constexpr std::array<const char*, 7> kWeekdays = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

}  // namespace

// ---------------------------------------------------------------- Olympic data

std::map<std::string, std::string> generate_olympic_data(std::uint64_t seed, std::size_t scale) {
    using S = DataType;
    Rng rng(seed);
    std::map<std::string, Relation> t;

    auto& country = t["Country"] = relation({{"CountryID", S::Integer}, {"CountryName", S::String}, {"Code", S::String}});
    const std::vector<std::pair<const char*, const char*>> countries = {
        {"Canada", "CAN"},  {"United States", "USA"}, {"Norway", "NOR"}, {"Germany", "GER"},
        {"Austria", "AUT"}, {"Switzerland", "SUI"},   {"Sweden", "SWE"}, {"Japan", "JPN"}};
    for (std::size_t i = 0; i < countries.size(); ++i)
        country.rows.push_back({Value(static_cast<std::int64_t>(i + 1)), countries[i].first, countries[i].second});

    auto& city = t["City"] = relation({{"CityID", S::Integer},
                                       {"CityName", S::String},
                                       {"Population", S::Integer},
                                       {"CountryID", S::Integer}});
    const std::vector<std::tuple<const char*, std::int64_t, std::int64_t>> cities = {
        {"Vancouver", 603502, 1}, {"Whistler", 9824, 1},     {"Richmond", 190473, 1},  {"Lake Placid", 2638, 2},
        {"Oslo", 580000, 3},      {"Berlin", 3400000, 4},    {"Innsbruck", 120000, 5}, {"St. Moritz", 5100, 6},
        {"Stockholm", 830000, 7}, {"Sapporo", 1900000, 8}};
    for (std::size_t i = 0; i < cities.size(); ++i) {
        const auto& [name, pop, c] = cities[i];
        city.rows.push_back({Value(static_cast<std::int64_t>(i + 1)), name, Value(pop), Value(c)});
    }

    auto& venue = t["Venue"] = relation({{"VenueID", S::Integer},
                                         {"VenueName", S::String},
                                         {"Capacity", S::Integer},
                                         {"CityID", S::Integer}});
    const std::vector<std::tuple<const char*, std::int64_t, std::int64_t>> venues = {
        {"BC Place", 54500, 1},
        {"Canada Hockey Place", 18630, 1},
        {"Pacific Coliseum", 14239, 1},
        {"UBC Thunderbird Arena", 7200, 1},
        {"Cypress Mountain", 12000, 1},
        {kWhistler, 12000, 2},
        {"Whistler Creekside", 7600, 2},
        {"Whistler Sliding Centre", 12000, 2},
        {"Richmond Olympic Oval", 8000, 3},
        {"Olympic Center", 8000, 4},
        {"Holmenkollen", 30000, 5},
        {"Olympiastadion Berlin", 74475, 6},
        {"Bergisel", 26000, 7},
        {"Cresta Run", 5000, 8},
        {"Ericsson Globe", 16000, 9},
        {"Okurayama", 50000, 10}};
    for (std::size_t i = 0; i < venues.size(); ++i) {
        const auto& [name, cap, c] = venues[i];
        venue.rows.push_back({Value(static_cast<std::int64_t>(i + 1)), name, Value(cap), Value(c)});
    }

    auto& year = t["Year"] = relation({{"YearID", S::Integer}, {"YearNumber", S::Integer}});
    year.rows.push_back({Value(1), Value(2009)});
    year.rows.push_back({Value(2), Value(2010)});

    auto& wm = t["WeekMonth"] = relation({{"WeekMonthID", S::Integer},
                                          {"Kind", S::String},
                                          {"Number", S::Integer},
                                          {"Label", S::String},
                                          {"YearID", S::Integer}});
    auto& day = t["Day"] = relation({{"DayID", S::Integer},
                                     {"Date", S::Date},
                                     {"DayOfWeek", S::String},
                                     {"WeekMonthID", S::Integer}});
    // 2009 days roll up into weeks, 2010 days into months.
    const Date first = Date::from_ymd(2009, 7, 1);
    const Date week_origin = Date::from_ymd(2008, 12, 29);  // Monday of the first week of 2009
    std::map<std::pair<std::string, std::int64_t>, std::int64_t> wm_ids;
    for (std::int32_t i = 0; i < 366; ++i) {
        const Date d{first.days + i};
        const bool weeks = d.year() == 2009;
        const std::int64_t number = weeks ? (d.days - d.weekday() - week_origin.days) / 7 + 1 : d.month();
        const std::string kind = weeks ? "W" : "M";
        auto [it, fresh] = wm_ids.emplace(std::pair(kind, number), static_cast<std::int64_t>(wm_ids.size() + 1));
        if (fresh) {
            char label[16];
            if (weeks) std::snprintf(label, sizeof label, "2009-W%02d", static_cast<int>(number));
            else std::snprintf(label, sizeof label, "2010-%02d", static_cast<int>(number));
            wm.rows.push_back({Value(it->second), kind, Value(number), std::string(label), Value(weeks ? 1 : 2)});
        }
        day.rows.push_back({Value(static_cast<std::int64_t>(i + 1)), Value(d), kWeekdays[d.weekday()], Value(it->second)});
    }

    auto& sport = t["Sport"] = relation({{"SportID", S::Integer}, {"SportName", S::String}});
    const std::vector<const char*> sports = {"Skiing", "Skating", "Bobsleigh", "Ice Hockey", "Biathlon", "Curling"};
    for (std::size_t i = 0; i < sports.size(); ++i) sport.rows.push_back({Value(static_cast<std::int64_t>(i + 1)), sports[i]});

    auto& discipline = t["Discipline"] = relation(
        {{"DisciplineID", S::Integer}, {"DisciplineName", S::String}, {"SportID", S::Integer}});
    const std::vector<std::pair<const char*, std::int64_t>> disciplines = {
        {"Alpine Skiing", 1}, {"Cross-Country Skiing", 1}, {"Ski Jumping", 1}, {"Freestyle Skiing", 1},
        {"Figure Skating", 2}, {"Speed Skating", 2},       {"Short Track", 2}, {"Bobsleigh", 3},
        {"Skeleton", 3},       {"Ice Hockey", 4},          {"Biathlon", 5},    {"Curling", 6}};
    auto& event = t["Event"] = relation({{"EventID", S::Integer},
                                         {"EventName", S::String},
                                         {"Gender", S::String},
                                         {"DisciplineID", S::Integer},
                                         {"SportID", S::Integer}});
    for (std::size_t i = 0; i < disciplines.size(); ++i) {
        const auto& [name, s] = disciplines[i];
        const auto id = static_cast<std::int64_t>(i + 1);
        discipline.rows.push_back({Value(id), name, Value(s)});
        event.rows.push_back({Value(2 * id - 1), "Women's " + std::string(name), "F", Value(id), Value(s)});
        event.rows.push_back({Value(2 * id), "Men's " + std::string(name), "M", Value(id), Value(s)});
    }

    auto& attendee = t["Attendee"] = relation(
        {{"AttendeeID", S::Integer}, {"AttendeeName", S::String}, {"CountryID", S::Integer}});
    constexpr std::size_t kAttendees = 400;
    for (std::size_t i = 1; i <= kAttendees; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "Attendee %04zu", i);
        attendee.rows.push_back({Value(static_cast<std::int64_t>(i)), std::string(name),
                                 Value(static_cast<std::int64_t>(1 + pick(rng, countries.size())))});
    }

    auto& attends = t["Attends"] = relation({{"VenueID", S::Integer},
                                             {"DayID", S::Integer},
                                             {"EventID", S::Integer},
                                             {"AttendeeID", S::Integer},
                                             {"TicketPrice", S::Decimal},
                                             {"Quantity", S::Integer},
                                             {"Channel", S::String}});
    const std::array<const char*, 3> channels = {"online", "box office", "partner"};
    std::set<std::array<std::int64_t, 4>> seen;
    while (attends.rows.size() < scale) {
        const std::array<std::int64_t, 4> key = {static_cast<std::int64_t>(1 + pick(rng, venues.size())),
                                                 static_cast<std::int64_t>(1 + pick(rng, 366)),
                                                 static_cast<std::int64_t>(1 + pick(rng, 2 * disciplines.size())),
                                                 static_cast<std::int64_t>(1 + pick(rng, kAttendees))};
        const auto price = static_cast<__int128>(2500 + pick(rng, 42501));
        const auto quantity = static_cast<std::int64_t>(1 + pick(rng, 6));
        const char* channel = channels[pick(rng, channels.size())];
        if (!seen.insert(key).second) continue;
        attends.rows.push_back({Value(key[0]), Value(key[1]), Value(key[2]), Value(key[3]),
                                Value(Decimal::from_units(price, 2)), Value(quantity), channel});
    }

    std::map<std::string, std::string> out;
    for (const auto& [name, rel] : t) out[name] = to_csv(rel);
    return out;
}

// ---------------------------------------------------------------- random instances

std::map<std::string, std::string> Instance::csv() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, rel] : tables) out[name] = to_csv(rel);
    return out;
}

Store Instance::store() const {
    Store s(sdl);
    for (const auto& [name, rel] : tables) s.load_relation(*sdl.find_table(name), rel);
    s.freeze();
    return s;
}

namespace {

/// Builds one random instance. Every level except exclusive alternatives owns a table
/// whose foreign keys point at its parents' tables, so the FK graph is a tree.
class InstanceBuilder {
public:
    explicit InstanceBuilder(std::uint64_t seed) : rng_(seed) {
        in_.cdl.name = "random" + std::to_string(seed);
        in_.sdl.name = in_.cdl.name;
    }

private:
    struct TableData {
        Table table;
        Relation data;
        bool fact = false;
    };

    struct LevelData {
        std::string name;
        std::string table;
        std::size_t members = 0;
        DataType val_type = DataType::Integer;
        std::vector<std::string> parents;
        std::string note_property;  ///< unmapped property, may be empty
        std::string extra_note;     ///< set when a detail table carries an extra property
    };

    std::string table_for(const std::string& level) { return "T" + level; }

    Value random_value(DataType type, std::int64_t id) {
        switch (type) {
            case DataType::Integer: return Value(static_cast<std::int64_t>(pick(rng_, 50)));
            case DataType::Decimal:
                return Value(Decimal::from_units(static_cast<__int128>(pick(rng_, 10000)), 2));
            case DataType::Date: return Value(Date::from_ymd(2020, 1, 1 + static_cast<unsigned>(pick(rng_, 28))));
            case DataType::String: return Value("v" + std::to_string(pick(rng_, 7)));
            case DataType::Boolean: return Value(id % 2 == 0);
        }
        return Value();
    }

    void add_column(TableData& t, std::string name, DataType type) {
        t.table.columns.push_back({name, type});
        t.data.schema.push_back({std::move(name), type});
    }

    /// Regular level with its own table: ID, Name, Val.
    LevelData& regular_level(const std::string& name, std::size_t members) {
        LevelData& l = levels_[name];
        l.name = name;
        l.table = table_for(name);
        l.members = members;
        const std::array<DataType, 4> types = {DataType::Integer, DataType::Decimal, DataType::Date, DataType::String};
        l.val_type = types[pick(rng_, types.size())];
        if (chance(rng_, 30)) l.note_property = name + "Note";
        order_.push_back(name);
        TableData& t = tables_[l.table];
        t.table.name = l.table;
        add_column(t, "ID", DataType::Integer);
        add_column(t, "Name", DataType::String);
        add_column(t, "Val", l.val_type);
        t.table.primaryKey = {"ID"};
        return l;
    }

    void dimension(std::size_t d) {
        const std::string prefix = "D" + std::to_string(d);
        const bool split = split_dim_ == d;
        const std::size_t regular = split ? 1 + pick(rng_, 2) : 1 + pick(rng_, 3);
        std::vector<std::string> names;
        for (std::size_t j = 0; j < regular; ++j) names.push_back(prefix + "L" + std::to_string(j));
        // Parents before children: level j > 0 is a parent of an earlier level.
        std::vector<std::size_t> child_of(regular, 0);
        for (std::size_t j = 1; j < regular; ++j) child_of[j] = pick(rng_, j);
        regular_level(names[0], 6 + pick(rng_, 12));
        for (std::size_t j = 1; j < regular; ++j) regular_level(names[j], 2 + pick(rng_, 4));
        for (std::size_t j = 1; j < regular; ++j) link(names[child_of[j]], names[j]);
        Hierarchy h{prefix + "H", {}};
        for (std::size_t j = 1; j < regular; ++j) hierarchy_rel(h, names[child_of[j]], names[j], std::nullopt);
        if (split) exclusive_split(prefix, names[pick(rng_, regular)], h);
        Dimension dim{prefix, names[0], {}};
        if (!h.relationships.empty()) {
            if (chance(rng_, 50)) dim.hierarchies.push_back(h.name);
            in_.cdl.hierarchies.push_back(std::move(h));
        }
        in_.cdl.dimensions.push_back(std::move(dim));
    }

    void link(const std::string& child, const std::string& parent) {
        levels_[child].parents.push_back(parent);
        TableData& t = tables_[table_for(child)];
        add_column(t, parent + "ID", DataType::Integer);
        t.table.foreignKeys.push_back({{parent + "ID"}, table_for(parent), {"ID"}});
    }

    void hierarchy_rel(Hierarchy& h, const std::string& child, const std::string& parent,
                       std::optional<std::string> group) {
        ParentChildRel r;
        r.child = child;
        r.parent = parent;
        r.exclusiveGroup = std::move(group);
        h.relationships.push_back(std::move(r));
    }

    /// Two alternatives over the child's table, told apart by a Kind column.
    void exclusive_split(const std::string& prefix, const std::string& child, Hierarchy& h) {
        split_child_ = child;
        const std::string a = prefix + "A";
        const std::string b = prefix + "B";
        split_a_ = a;
        split_b_ = b;
        TableData& t = tables_[table_for(child)];
        add_column(t, "Kind", DataType::String);
        const std::string group = prefix + "X";
        hierarchy_rel(h, child, a, group);
        hierarchy_rel(h, child, b, group);
        if (chance(rng_, 60)) {
            split_q_ = prefix + "Q";
            regular_level(*split_q_, 2 + pick(rng_, 2));
            link(child, *split_q_);
            levels_[child].parents.pop_back();  // reached through the alternatives, not directly
            hierarchy_rel(h, a, *split_q_, std::nullopt);
            hierarchy_rel(h, b, *split_q_, std::nullopt);
        }
    }

    /// Gives one regular level a second fragment on a detail table.
    void detail_table() {
        std::vector<std::string> candidates;
        for (const auto& n : order_) candidates.push_back(n);
        const std::string level = candidates[pick(rng_, candidates.size())];
        levels_[level].extra_note = level + "Extra";
        TableData& t = tables_["T" + level + "Detail"];
        t.table.name = "T" + level + "Detail";
        add_column(t, "DetailID", DataType::Integer);
        add_column(t, "OwnerID", DataType::Integer);
        add_column(t, "Note", DataType::String);
        t.table.primaryKey = {"DetailID"};
        t.table.foreignKeys.push_back({{"OwnerID"}, table_for(level), {"ID"}});
        detail_level_ = level;
    }

    void fact(std::size_t dims) {
        FactRelationship f;
        f.name = "Sales";
        TableData& t = tables_["TSales"];
        t.fact = true;
        t.table.name = "TSales";
        add_column(t, "FactID", DataType::Integer);
        t.table.primaryKey = {"FactID"};
        MappingFragment m;
        m.name = "SalesMap";
        m.kind = FragmentKind::FactRelationship;
        m.entity = f.name;
        m.table = t.table.name;
        for (std::size_t d = 0; d < dims; ++d) {
            const Dimension& dim = in_.cdl.dimensions[d];
            const std::string role = "R" + std::to_string(d);
            const std::string column = role + "Key";
            f.roles.push_back({role, dim.name});
            add_column(t, column, DataType::Integer);
            t.table.foreignKeys.push_back({{column}, table_for(dim.bottomLevel), {"ID"}});
            if (chance(rng_, 50)) m.propertyMappings.push_back({dim.bottomLevel + "ID", column, role});
        }
        add_column(t, "Amount", DataType::Decimal);
        add_column(t, "Units", DataType::Integer);
        add_column(t, "Tag", DataType::String);
        f.measures = {{"Amount", DataType::Decimal}, {"Units", DataType::Integer}};
        f.properties = {{"Tag", DataType::String}};
        m.propertyMappings.push_back({"Amount", "Amount", ""});
        m.propertyMappings.push_back({"Units", "Units", ""});
        m.propertyMappings.push_back({"Tag", "Tag", ""});
        fact_rows_ = 20 + pick(rng_, 60);
        fact_dims_ = dims;
        in_.cdl.factRelationships.push_back(std::move(f));
        in_.mdl.fragments.push_back(std::move(m));
    }

public:
    /// Data generation runs after structure: parents first, then children, then facts.
    Instance finish() {
        for (const auto& name : order_) emit_level(name);
        if (split_child_) emit_split();
        emit_data();
        in_.cdl.levels.clear();
        for (const auto& name : order_) in_.cdl.levels.push_back(level_defs_.at(name));
        if (split_child_) {
            in_.cdl.levels.push_back(level_defs_.at(*split_a_));
            in_.cdl.levels.push_back(level_defs_.at(*split_b_));
        }
        cardinalities();
        for (auto& t : tables_) {
            if (t.second.fact) in_.sdl.factTables.push_back(t.second.table);
            else in_.sdl.dimensionTables.push_back(t.second.table);
            in_.tables[t.first] = std::move(t.second.data);
        }
        return std::move(in_);
    }

    void build_structure() {
        const std::size_t dims = 2 + pick(rng_, 2);
        split_dim_ = chance(rng_, 60) ? std::optional(pick(rng_, dims)) : std::nullopt;
        for (std::size_t d = 0; d < dims; ++d) dimension(d);
        if (chance(rng_, 50)) detail_table();
        fact(dims);
    }

private:
    void emit_level(const std::string& name) {
        const LevelData& l = levels_.at(name);
        Level def;
        def.name = name;
        def.properties = {{name + "ID", DataType::Integer}, {name + "Name", DataType::String}, {name + "Val", l.val_type}};
        if (!l.note_property.empty()) def.properties.push_back({l.note_property, DataType::String});
        if (!l.extra_note.empty()) def.properties.push_back({l.extra_note, DataType::String});
        def.key = {name + "ID"};
        level_defs_[name] = def;

        MappingFragment m;
        m.kind = FragmentKind::Level;
        m.entity = name;
        m.table = l.table;
        m.propertyMappings = {{name + "ID", "ID", ""}, {name + "Name", "Name", ""}, {name + "Val", "Val", ""}};
        in_.mdl.fragments.push_back(std::move(m));
        if (!l.extra_note.empty()) {
            MappingFragment d;
            d.name = name + "Detail";
            d.kind = FragmentKind::Level;
            d.entity = name;
            d.table = "T" + name + "Detail";
            d.propertyMappings = {{l.extra_note, "Note", ""}};
            in_.mdl.fragments.push_back(std::move(d));
        }
    }

    void emit_split() {
        const std::string& c = *split_child_;
        const std::vector<std::pair<std::string, std::vector<std::string>>> alts = {{*split_a_, {"a1", "a2"}},
                                                                                    {*split_b_, {"b"}}};
        for (const auto& [name, kinds] : alts) {
            Level def;
            def.name = name;
            def.properties = {{name + "ID", DataType::Integer}, {name + "Name", DataType::String}};
            def.key = {name + "ID"};
            level_defs_[name] = def;
            MappingFragment m;
            m.name = name + "Split";
            m.kind = FragmentKind::Level;
            m.entity = name;
            m.table = table_for(c);
            m.propertyMappings = {{name + "ID", "ID", ""}, {name + "Name", "Name", ""}};
            m.conditions.push_back({"Kind", kinds.size() > 1 ? ConditionOp::In : ConditionOp::Equals, kinds});
            in_.mdl.fragments.push_back(std::move(m));
        }
    }

    void emit_data() {
        // Top-down so that children can reference existing parents.
        std::vector<std::string> topo;
        std::set<std::string> done;
        std::function<void(const std::string&)> visit = [&](const std::string& n) {
            if (done.count(n)) return;
            done.insert(n);
            for (const auto& p : levels_.at(n).parents) visit(p);
            if (split_child_ == n && split_q_) visit(*split_q_);
            topo.push_back(n);
        };
        for (const auto& n : order_) visit(n);
        for (const auto& name : topo) {
            const LevelData& l = levels_.at(name);
            TableData& t = tables_.at(l.table);
            for (std::size_t i = 1; i <= l.members; ++i) {
                const auto id = static_cast<std::int64_t>(i);
                Row row(t.table.columns.size());
                row[0] = Value(id);
                row[1] = Value(name + "-" + std::to_string(i));
                row[2] = random_value(l.val_type, id);
                for (std::size_t c = 3; c < t.table.columns.size(); ++c) {
                    const std::string& col = t.table.columns[c].name;
                    if (col == "Kind") {
                        const std::array<const char*, 3> kinds = {"a1", "a2", "b"};
                        row[c] = Value(kinds[pick(rng_, kinds.size())]);
                    } else {
                        const std::string parent = col.substr(0, col.size() - 2);
                        row[c] = Value(static_cast<std::int64_t>(1 + pick(rng_, levels_.at(parent).members)));
                    }
                }
                t.data.rows.push_back(row);
                Row member = {row[0], row[1], row[2]};
                if (!l.note_property.empty()) member.push_back(Value());
                if (!l.extra_note.empty()) member.push_back(Value(name + "-extra-" + std::to_string(i % 3)));
                in_.members[name].push_back(std::move(member));
                if (split_child_ == name) {
                    const std::string kind = row[t.table.column_index("Kind").value()].as<std::string>();
                    in_.members[kind == "b" ? *split_b_ : *split_a_].push_back({row[0], row[1]});
                }
            }
        }
        if (detail_level_) {
            TableData& t = tables_.at("T" + *detail_level_ + "Detail");
            std::int64_t next = 1;
            for (std::size_t i = 1; i <= levels_.at(*detail_level_).members; ++i) {
                const std::size_t copies = 1 + pick(rng_, 2);
                for (std::size_t k = 0; k < copies; ++k)
                    t.data.rows.push_back({Value(next++), Value(static_cast<std::int64_t>(i)),
                                           Value(*detail_level_ + "-extra-" + std::to_string(i % 3))});
            }
        }
        TableData& f = tables_.at("TSales");
        for (std::size_t i = 1; i <= fact_rows_; ++i) {
            Row row;
            row.push_back(Value(static_cast<std::int64_t>(i)));
            for (std::size_t d = 0; d < fact_dims_; ++d) {
                const auto& bottom = in_.cdl.dimensions[d].bottomLevel;
                row.push_back(Value(static_cast<std::int64_t>(1 + pick(rng_, levels_.at(bottom).members))));
            }
            row.push_back(chance(rng_, 10) ? Value() : Value(Decimal::from_units(static_cast<__int128>(pick(rng_, 100000)), 2)));
            row.push_back(Value(static_cast<std::int64_t>(pick(rng_, 20))));
            row.push_back(Value(chance(rng_, 50) ? "x" : "y"));
            f.data.rows.push_back(std::move(row));
        }
    }

    /// Bounds that the generated data satisfies exactly.
    void cardinalities() {
        for (auto& h : in_.cdl.hierarchies) {
            for (auto& r : h.relationships) {
                std::map<Value, std::vector<Value>> children;  // parent -> children
                for (const Row& p : in_.members[r.parent]) children[p[0]];
                std::size_t without_parent = 0;
                for (const Row& c : in_.members[r.child]) {
                    auto parent = parent_key(r.child, r.parent, c[0]);
                    if (!parent) {
                        ++without_parent;
                        continue;
                    }
                    children[*parent].push_back(c[0]);
                }
                std::size_t min_children = SIZE_MAX;
                std::size_t max_children = 0;
                for (const auto& [p, cs] : children) {
                    min_children = std::min(min_children, cs.size());
                    max_children = std::max(max_children, cs.size());
                }
                if (children.empty()) min_children = 0;
                r.childCard = {min_children > 0 ? 1u : 0u, max_children > 1};
                r.parentCard = {without_parent == 0 && !r.exclusiveGroup ? 1u : 0u, false};
            }
        }
    }

    /// Parent key of a child member, looked up in the generated tables.
    std::optional<Value> parent_key(const std::string& child, const std::string& parent, const Value& child_key) {
        const bool alternative = child == split_a_ || child == split_b_;
        const std::string table = alternative ? table_for(*split_child_) : levels_.at(child).table;
        const TableData& t = tables_.at(table);
        for (const Row& row : t.data.rows) {
            if (row[0] != child_key) continue;
            if (parent == split_a_ || parent == split_b_) {
                const std::string kind = row[t.table.column_index("Kind").value()].as<std::string>();
                const bool is_b = kind == "b";
                if ((parent == split_b_) != is_b) return std::nullopt;
                return row[0];
            }
            return row[t.table.column_index(parent + "ID").value()];
        }
        return std::nullopt;
    }

    Rng rng_;
    Instance in_;
    std::map<std::string, LevelData> levels_;
    std::map<std::string, Level> level_defs_;
    std::map<std::string, TableData> tables_;
    std::vector<std::string> order_;
    std::optional<std::size_t> split_dim_;
    std::optional<std::string> split_child_;
    std::optional<std::string> split_a_;
    std::optional<std::string> split_b_;
    std::optional<std::string> split_q_;
    std::optional<std::string> detail_level_;
    std::size_t fact_rows_ = 0;
    std::size_t fact_dims_ = 0;
};

}  // namespace

Instance generate_random_instance(std::uint64_t seed) {
    InstanceBuilder b(seed);
    b.build_structure();
    return b.finish();
}

CqlQuery random_query(const Instance& instance, std::mt19937_64& rng) {
    const CdlModel& cdl = instance.cdl;
    const FactRelationship& fact = cdl.factRelationships.front();
    CqlQuery q;
    q.factRelationship = fact.name;

    const std::array<AggregateFn, 5> fns = {AggregateFn::Sum, AggregateFn::Count, AggregateFn::Avg,
                                            AggregateFn::Min, AggregateFn::Max};
    q.aggregation.fn = fns[pick(rng, fns.size())];
    if (q.aggregation.fn != AggregateFn::Count || chance(rng, 50))
        q.aggregation.measure = fact.measures[pick(rng, fact.measures.size())].name;

    // Candidate levels per dimension: bottom plus everything reachable upward.
    std::vector<std::string> condition_levels;
    for (const Role& role : fact.roles) {
        const Dimension* dim = cdl.find_dimension(role.dimension);
        std::vector<std::string> reachable;
        for (const auto& r : cdl.dimension_relationships(*dim))
            if (std::find(reachable.begin(), reachable.end(), r.parent) == reachable.end()) reachable.push_back(r.parent);
        condition_levels.push_back(dim->bottomLevel);
        if (!reachable.empty() && chance(rng, 60)) {
            const std::string target = reachable[pick(rng, reachable.size())];
            q.rollups[dim->name] = target;
            condition_levels.push_back(target);
        } else if (chance(rng, 30)) {
            q.rollups[dim->name] = dim->bottomLevel;
        }
    }

    const std::size_t conditions = pick(rng, 3);
    for (std::size_t i = 0; i < conditions; ++i) {
        const Level* level = cdl.find_level(condition_levels[pick(rng, condition_levels.size())]);
        auto members = instance.members.find(level->name);
        if (members == instance.members.end() || members->second.empty()) continue;
        const std::size_t p = pick(rng, level->properties.size());
        auto draw = [&] { return members->second[pick(rng, members->second.size())][p]; };
        QueryCondition c{level->name, level->properties[p].name, CompareOp::Equals, {}};
        const std::array<CompareOp, 4> ops = {CompareOp::Equals, CompareOp::In, CompareOp::Less, CompareOp::Greater};
        c.op = ops[pick(rng, ops.size())];
        c.values.push_back(draw());
        if (c.op == CompareOp::In) c.values.push_back(draw());
        if (std::any_of(c.values.begin(), c.values.end(), [](const Value& v) { return v.is_null(); })) continue;
        q.conditions.push_back(std::move(c));
    }
    return q;
}

}  // namespace cim::fixtures
