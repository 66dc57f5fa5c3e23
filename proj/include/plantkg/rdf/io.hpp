#pragma once

#include <string>
#include <string_view>

#include "plantkg/rdf/graph.hpp"

namespace plantkg::rdf {

enum class Format { NTriples, TurtleSubset };

// Parses a document into a graph. `base_prefixes`, when given, are available
// in addition to prefixes declared in the document itself.
Graph load(std::string_view text, Format format,
           const NamespaceMap* base_prefixes = nullptr);

// Format picked by extension: .nt -> N-Triples, anything else Turtle subset.
Graph load_file(const std::string& path, const NamespaceMap* base_prefixes = nullptr);

// `canonical` sorts the output (N-Triples: by line; Turtle: by subject/predicate),
// making serialization byte-stable for a given triple set.
std::string serialize(const Graph& g, Format format, bool canonical = true);

void save_file(const Graph& g, const std::string& path, Format format,
               bool canonical = true);

// Reads a prefix file (Turtle @prefix directives, one per line).
NamespaceMap load_prefix_file(const std::string& path);

// The toolkit's bundled namespaces (rdf, rdfs, owl, xsd, sosa, ssn plus the
// project prefixes). Used as the implicit base for queries and fixtures.
const NamespaceMap& default_prefixes();

// True when the two graphs contain the same triples up to a consistent
// renaming of blank-node labels.
bool isomorphic_modulo_blanks(const Graph& a, const Graph& b);

}  // namespace plantkg::rdf
