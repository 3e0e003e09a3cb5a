// Interpreter for the subset of JSON Schema used by the shared game-state
// schema file. The schema document is the single source of truth for what
// the service accepts; nothing here hard-codes a field range.
//
// Supported keywords: type (object / integer / number), const, enum,
// minimum, maximum, properties, required, additionalProperties: false,
// allOf, if / then. That is exactly what the shared file uses; an
// unrecognized keyword throws rather than silently passing.

const KNOWN_KEYWORDS = new Set([
  "$schema",
  "$id",
  "title",
  "description",
  "type",
  "const",
  "enum",
  "minimum",
  "maximum",
  "properties",
  "required",
  "additionalProperties",
  "allOf",
  "if",
  "then",
]);

export interface SchemaIssue {
  path: string;
  message: string;
}

type SchemaNode = Record<string, unknown>;

function isPlainObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function checkKeywords(schema: SchemaNode): void {
  for (const key of Object.keys(schema)) {
    if (!KNOWN_KEYWORDS.has(key)) {
      throw new Error(`schema keyword not supported by this client: ${key}`);
    }
  }
}

function validateNode(value: unknown, schema: SchemaNode, path: string, issues: SchemaIssue[]): void {
  checkKeywords(schema);

  if ("const" in schema && value !== schema.const) {
    issues.push({ path, message: `must equal ${JSON.stringify(schema.const)}` });
    return;
  }
  if ("enum" in schema) {
    const allowed = schema.enum as unknown[];
    if (!allowed.includes(value)) {
      issues.push({ path, message: `must be one of ${JSON.stringify(allowed)}` });
      return;
    }
  }

  const type = schema.type as string | undefined;
  if (type === "integer") {
    if (typeof value !== "number" || !Number.isInteger(value)) {
      issues.push({ path, message: "must be an integer" });
      return;
    }
  } else if (type === "number") {
    if (typeof value !== "number" || !Number.isFinite(value)) {
      issues.push({ path, message: "must be a finite number" });
      return;
    }
  } else if (type === "object") {
    if (!isPlainObject(value)) {
      issues.push({ path, message: "must be an object" });
      return;
    }
  } else if (type !== undefined) {
    throw new Error(`schema type not supported by this client: ${type}`);
  }

  if (typeof value === "number") {
    if (typeof schema.minimum === "number" && value < schema.minimum) {
      issues.push({ path, message: `must be >= ${schema.minimum}` });
    }
    if (typeof schema.maximum === "number" && value > schema.maximum) {
      issues.push({ path, message: `must be <= ${schema.maximum}` });
    }
  }

  if (isPlainObject(value)) {
    const props = (schema.properties ?? {}) as Record<string, SchemaNode>;
    for (const name of (schema.required ?? []) as string[]) {
      if (!(name in value)) {
        issues.push({ path: joinPath(path, name), message: "is required" });
      }
    }
    if (schema.additionalProperties === false) {
      for (const name of Object.keys(value)) {
        if (!(name in props)) {
          issues.push({ path: joinPath(path, name), message: "is not an accepted field" });
        }
      }
    }
    for (const [name, sub] of Object.entries(props)) {
      if (name in value) {
        validateNode(value[name], sub, joinPath(path, name), issues);
      }
    }
  }

  if (Array.isArray(schema.allOf)) {
    for (const clause of schema.allOf as SchemaNode[]) {
      applyConditional(value, clause, path, issues);
    }
  } else if ("if" in schema || "then" in schema) {
    applyConditional(value, schema, path, issues);
  }
}

function applyConditional(value: unknown, clause: SchemaNode, path: string, issues: SchemaIssue[]): void {
  const cond = clause.if as SchemaNode | undefined;
  const then = clause.then as SchemaNode | undefined;
  if (cond === undefined || then === undefined) {
    return;
  }
  const trial: SchemaIssue[] = [];
  validateNode(value, cond, path, trial);
  if (trial.length === 0) {
    validateNode(value, then, path, issues);
  }
}

function joinPath(path: string, name: string): string {
  return path === "" ? name : `${path}.${name}`;
}

/** Validate a candidate game state against the shared schema document.
 *  Returns an empty list exactly when the service would accept the value. */
export function validateGameState(value: unknown, schemaDoc: unknown): SchemaIssue[] {
  if (!isPlainObject(schemaDoc)) {
    throw new Error("schema document must be a JSON object");
  }
  const issues: SchemaIssue[] = [];
  validateNode(value, schemaDoc, "", issues);
  return issues;
}
