#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "cim/model.hpp"
#include "cim/query.hpp"
#include "cim/storage.hpp"

namespace cim::fixtures {

/// Name of the venue the sample query filters on.
inline constexpr const char* kWhistler = "Whistler Olympic Park";

/// CSV text per table of the Olympic warehouse: 366 days from 2009-07-01, 2009
/// drilling into weeks and 2010 into months, and `scale` Attends facts.
/// Deterministic per seed.
std::map<std::string, std::string> generate_olympic_data(std::uint64_t seed, std::size_t scale);

/// A complete model with data.
struct Instance {
    CdlModel cdl;
    SdlModel sdl;
    MdlModel mdl;
    std::map<std::string, Relation> tables;
    /// Member property rows per level (level property order), for drawing query literals.
    std::map<std::string, std::vector<Row>> members;

    std::map<std::string, std::string> csv() const;
    /// Store with every table loaded, frozen.
    Store store() const;
};

/// Small validation-clean, compilable instance with consistent data: up to three
/// dimensions of at most five levels, optionally an exclusive split partitioned
/// by a discriminator column and a level spanning two tables.
Instance generate_random_instance(std::uint64_t seed);

/// Random well-formed query over `instance`; literals are drawn from member data.
CqlQuery random_query(const Instance& instance, std::mt19937_64& rng);

}  // namespace cim::fixtures
