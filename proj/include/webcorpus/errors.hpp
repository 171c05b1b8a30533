#pragma once

#include <stdexcept>
#include <string>

namespace webcorpus {

// Base class for all library errors. Subclasses distinguish malformed
// input (FormatError), unparseable field content (ParseError), bad
// archive locators (LocatorError) and so on, so callers can react to
// the class of failure without string-matching messages.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structural problems: wrong field count, missing header terminator,
// unexpected record layout.
class FormatError : public Error {
public:
    using Error::Error;
};

// A field was located but its content does not parse (non-numeric
// status, invalid calendar date, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// URL cannot be canonicalized into SURT form.
class CanonicalizationError : public Error {
public:
    using Error::Error;
};

// A (file, offset, length) locator does not point at a valid gzip member.
class LocatorError : public Error {
public:
    using Error::Error;
};

// Data at a valid-looking locator is truncated or fails to decompress.
class CorruptionError : public Error {
public:
    using Error::Error;
};

// Field-tree path violates the key grammar.
class PathError : public Error {
public:
    using Error::Error;
};

// A typed accessor demanded a type other than the stored one.
class TypedAccessError : public Error {
public:
    using Error::Error;
};

// Plan construction failed (unknown enrichment, derived filter with no
// producing step, ...).
class PlanError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace webcorpus
