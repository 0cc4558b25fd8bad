export function fmt6(x: number): string {
  return x.toFixed(6);
}

export function subsetLabel(subset: string[]): string {
  return subset.length ? [...subset].sort().join(',') : '-';
}
