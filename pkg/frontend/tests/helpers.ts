import { readFileSync } from 'node:fs';
import { inject } from 'vitest';

import { ApiClient } from '../src/api';

export function fixture(name: string): string {
  return readFileSync(new URL(`../../fixtures/${name}`, import.meta.url), 'utf8');
}

export function client(): ApiClient {
  return new ApiClient(inject('baseUrl'));
}

// Deep key scan: every object key reachable anywhere in a payload.
export function collectKeys(data: unknown, into: Set<string>): Set<string> {
  if (Array.isArray(data)) {
    for (const item of data) collectKeys(item, into);
  } else if (data !== null && typeof data === 'object') {
    for (const [key, value] of Object.entries(data)) {
      into.add(key);
      collectKeys(value, into);
    }
  }
  return into;
}

// Deep value scan: every primitive value reachable anywhere in a payload.
export function collectValues(data: unknown, into: unknown[]): unknown[] {
  if (Array.isArray(data)) {
    for (const item of data) collectValues(item, into);
  } else if (data !== null && typeof data === 'object') {
    for (const value of Object.values(data)) collectValues(value, into);
  } else {
    into.push(data);
  }
  return into;
}
